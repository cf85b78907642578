"""Fourier coefficients of the fluctuations and the asymptotic expansion of X(N).

For an eigenvalue lambda of C with |lambda| > R the summatory function has
the main term ``N^{log_q lambda} sum_k (log_q N)^k Phi_{lambda k}(log_q N)``
with coefficients

    phi_{lambda k l} = (log q)^k / k! * Res_{s=s_l} (x(0) + X(s)) (s - s_l)^k / s,
    s_l = log_q lambda + 2 l pi i / (p log q),

(p = 1 for a single eigenvalue).  Residues are taken numerically with the
trapezoidal rule on a circle around each pole; since the integrand is
analytic on an annulus around the circle, the rule converges geometrically
in the number of nodes.

The evaluator passed around only needs the attributes ``q, log_q, log_R,
delta, tolerance`` and the methods ``residue_integrand(s)`` and
``pole_points(center, radius)``; :class:`regseq.dirichlet.DirichletEvaluator`
provides them.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, GeometryError, InvalidArgumentError
from .linrep import summatory_fast

M_START = 64
M_MAX = 4096
# contour points handed to one integrand call; fixed so results do not
# depend on the number of worker threads
CHUNK = 8192
POLE_MERGE = 1e-9
CIRCLE_TOL = 1e-5


def thread_count() -> int:
    """Worker threads: REGSEQ_THREADS if set, otherwise the CPU count."""
    env = os.environ.get("REGSEQ_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidArgumentError(f"REGSEQ_THREADS must be an integer, got {env!r}")
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def make_executor(threads: int | None = None):
    """A thread pool, or None when only one thread is allowed."""
    n = thread_count() if threads is None else threads
    return ThreadPoolExecutor(max_workers=n) if n > 1 else None


# --- series and expansions -------------------------------------------------

@dataclass
class FluctuationSeries:
    """Truncated Fourier series Phi(u) = sum_l phi_l exp(2 l pi i u / period)."""

    lam: complex
    k: int
    period: int
    indices: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.indices.shape != self.coeffs.shape:
            raise InvalidArgumentError("indices and coeffs must have the same length")
        if self.period < 1:
            raise InvalidArgumentError("period must be >= 1")

    @property
    def L(self) -> int:
        return int(np.max(np.abs(self.indices))) if self.indices.size else 0

    def coefficient(self, ell: int) -> complex:
        hit = np.nonzero(self.indices == ell)[0]
        return complex(self.coeffs[hit[0]]) if hit.size else 0j

    def __call__(self, u):
        """Evaluate at real u (scalar or array).

        The phase is reduced modulo the period first, so Phi(u) and
        Phi(u + period) are computed from identical arguments.
        """
        u = np.asarray(u, dtype=float)
        frac = np.mod(u, self.period) / self.period
        flat = frac.ravel()
        out = np.empty(flat.shape, dtype=complex)
        step = max(1, 2**22 // max(1, len(self.indices)))
        for i in range(0, len(flat), step):
            ph = np.exp(2j * np.pi * np.outer(flat[i:i + step], self.indices))
            out[i:i + step] = ph @ self.coeffs
        return out.reshape(u.shape) if u.ndim else complex(out[0])


@dataclass
class AsymptoticExpansion:
    """Main terms N^{log_q lam} (log_q N)^k Phi(log_q N) plus error metadata."""

    terms: list
    error_exponent: float
    error_log_power: int
    q: int = 2
    meta: dict = field(default_factory=dict)

    def term_value(self, term: FluctuationSeries, N):
        N = np.asarray(N, dtype=float)
        u = np.log(N) / math.log(self.q)
        e = np.log(complex(term.lam)) / math.log(self.q)
        return np.exp(e * np.log(N)) * u ** term.k * term(u)

    def __call__(self, N):
        return evaluate_expansion(self, N)


def evaluate_expansion(exp: AsymptoticExpansion, N, skip=()):
    """Sum of the main terms at N (N >= 2, real or array); error term omitted."""
    N = np.asarray(N, dtype=float)
    if np.any(N < 2):
        raise InvalidArgumentError("evaluate_expansion needs N >= 2")
    total = np.zeros(N.shape, dtype=complex)
    for i, t in enumerate(exp.terms):
        if i not in skip:
            total = total + exp.term_value(t, N)
    return total if N.ndim else complex(total)


# --- geometry ----------------------------------------------------------------

def log_q(lam, q) -> complex:
    """Principal log_q of a nonzero complex number."""
    lam = complex(lam)
    if lam == 0:
        raise InvalidArgumentError("log_q(0) is undefined")
    return complex(np.log(lam) / math.log(q))


def pole_centers(ev, lam, indices, period: int = 1) -> np.ndarray:
    step = 2j * math.pi / (period * ev.log_q)
    return log_q(lam, ev.q) + step * np.asarray(indices, dtype=float)


def _nearest_other_pole(ev, s0, radius):
    dists = [abs(z - s0) for z in ev.pole_points(s0, radius) if abs(z - s0) > POLE_MERGE]
    return min(dists) if dists else math.inf


def _strip_room(ev, s0):
    return s0.real - (ev.log_R + ev.delta / 2)


def default_rho(ev, s0: complex) -> float:
    """min(0.4/log q, half the distance to the nearest other pole,
    distance to the strip boundary, |s0|) / 2."""
    s0 = complex(s0)
    cap = 0.4 / ev.log_q
    near = _nearest_other_pole(ev, s0, 2 * cap)
    rho = min(cap, near / 2, _strip_room(ev, s0), abs(s0)) / 2
    if not rho > 0:
        raise GeometryError(f"no admissible contour radius around s = {s0:.6g}")
    return rho


def check_rho(ev, s0: complex, rho: float) -> None:
    """Raise GeometryError unless the circle |s - s0| = rho is admissible."""
    s0 = complex(s0)
    if s0.real < ev.log_R + ev.delta:
        raise GeometryError(
            f"pole at Re s = {s0.real:.6g} lies outside the strip Re s >= log_q R + delta = "
            f"{ev.log_R + ev.delta:.6g}; lower delta or R")
    if not rho > 0:
        raise GeometryError("rho must be positive")
    if rho >= _strip_room(ev, s0):
        raise GeometryError(f"circle of radius {rho:.6g} leaves Re s > log_q R + delta/2")
    if rho >= abs(s0):
        raise GeometryError(f"circle of radius {rho:.6g} around {s0:.6g} encloses s = 0")
    if _nearest_other_pole(ev, s0, rho) <= rho:
        raise GeometryError(f"circle of radius {rho:.6g} around {s0:.6g} encloses another pole")


# --- residues -----------------------------------------------------------------

def _integrand(ev, pts, executor=None):
    chunks = [pts[i:i + CHUNK] for i in range(0, len(pts), CHUNK)]
    if executor is None or len(chunks) < 2:
        parts = [ev.residue_integrand(c) for c in chunks]
    else:
        parts = list(executor.map(ev.residue_integrand, chunks))
    return np.concatenate(parts) if parts else np.zeros(0, complex)


def contour_residues(ev, centers, rho, ks=(0,), *, m_start: int = M_START,
                     m_max: int = M_MAX, tol: float | None = None, executor=None) -> np.ndarray:
    """Res_{s=c} f(s) (s - c)^k for f = ev.residue_integrand.

    Returns an array of shape ``(len(ks), len(centers))``.  The node count
    starts at ``m_start`` and doubles (reusing the old nodes) until two
    successive estimates differ by less than ``tol * max(1, |value|)``.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    rho = np.broadcast_to(np.asarray(rho, dtype=float), centers.shape).copy()
    ks = np.asarray(ks, dtype=int)
    tol = ev.tolerance if tol is None else tol
    C = len(centers)
    out = np.zeros((len(ks), C), dtype=complex)
    if C == 0:
        return out

    def sums(theta, idx):
        pts = (centers[idx, None] + rho[idx, None] * np.exp(1j * theta)[None, :]).ravel()
        f = _integrand(ev, pts, executor).reshape(len(idx), len(theta))
        w = (rho[idx, None, None] * np.exp(1j * theta)[None, None, :]) ** (ks[None, :, None] + 1)
        return np.einsum("cm,ckm->kc", f, w)

    M = m_start
    idx = np.arange(C)
    acc = sums(2 * np.pi * np.arange(M) / M, idx)
    prev = acc / M
    while True:
        theta = 2 * np.pi * (np.arange(M) + 0.5) / M
        acc = acc + sums(theta, idx)
        M *= 2
        cur = acc / M
        change = np.abs(cur - prev).max(axis=0)
        scale = np.maximum(1.0, np.abs(cur).max(axis=0))
        done = change <= tol * scale
        out[:, idx[done]] = cur[:, done]
        idx, acc, prev = idx[~done], acc[:, ~done], cur[:, ~done]
        if idx.size == 0:
            return out
        if 2 * M > m_max:
            raise AccuracyError(
                f"contour quadrature did not settle below {tol:.3g} with {M} nodes "
                f"(worst change {change[~done].max():.3g})")


def residue_coefficients(ev, lam, indices, ks=(0,), *, period: int = 1, rho=None,
                         executor=None, tol=None) -> np.ndarray:
    """(log q)^k/k! Res (x(0)+X(s))(s-s_l)^k/s at s_l = log_q lam + 2 l pi i/(p log q).

    Shape ``(len(ks), len(indices))``.
    """
    indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    centers = pole_centers(ev, lam, indices, period)
    if rho is None:
        rhos = np.array([default_rho(ev, c) for c in centers])
    else:
        rhos = np.full(len(centers), float(rho))
    for c, r in zip(centers, rhos):
        check_rho(ev, c, r)
    res = contour_residues(ev, centers, rhos, ks, executor=executor, tol=tol)
    scale = np.array([ev.log_q ** k / math.factorial(k) for k in ks])
    return res * scale[:, None]


def fourier_coefficient(ev, lam, k: int, ell: int, rho: float | None = None) -> complex:
    """phi_{lam k ell} for one index."""
    if k < 0:
        raise InvalidArgumentError("k must be >= 0")
    return complex(residue_coefficients(ev, lam, [ell], (k,), rho=rho)[0, 0])


def fluctuation_series(ev, lam, ks, L: int, *, rho=None, executor=None) -> list[FluctuationSeries]:
    """One period-1 FluctuationSeries per k, coefficients |l| <= L."""
    idx = np.arange(-L, L + 1)
    coeffs = residue_coefficients(ev, lam, idx, tuple(ks), rho=rho, executor=executor)
    return [FluctuationSeries(complex(lam), int(k), 1, idx, coeffs[i]) for i, k in enumerate(ks)]


def build_expansion(ev, spectral, L: int = 50, R: float | None = None, *, rho=None,
                    executor=None, circle_tol: float = CIRCLE_TOL) -> AsymptoticExpansion:
    """All main terms: every eigenvalue with |lam| > R and 0 <= k < m(lam).

    ``errorLogPower`` is the largest m(lam) among eigenvalues on |lam| = R
    (within ``circle_tol`` relative).
    """
    if L < 0:
        raise InvalidArgumentError("L must be >= 0")
    R = ev.R if R is None else float(R)
    terms = []
    power = 0
    for e in spectral.eigenvalues:
        a = abs(e.value)
        if abs(a - R) <= circle_tol * R:
            power = max(power, e.max_jordan)
        elif a > R:
            terms.extend(fluctuation_series(ev, e.value, range(e.max_jordan), L,
                                            rho=rho, executor=executor))
    exponent = math.log(R) / math.log(ev.q)
    return AsymptoticExpansion(terms, exponent, power, q=ev.q)


def empirical_fluctuation(rep, exp: AsymptoticExpansion, term_index: int, u_grid):
    """Samples (X(q^u) - other main terms) / (q^{u log_q lam} u^k) on u_grid.

    X at a real argument x means sum_{0<=n<x} x(n) = X(ceil(x)).  Returns
    ``(empirical, reconstructed)`` arrays; the latter is the stored
    truncated series of the chosen term.
    """
    u = np.asarray(u_grid, dtype=float)
    if np.any(u <= 0):
        raise InvalidArgumentError("u must be positive")
    term = exp.terms[term_index]
    q = rep.q
    x = np.power(float(q), u)
    Xv = np.array([complex(summatory_fast(rep, int(math.ceil(v - 1e-9 * v)))) for v in x])
    others = evaluate_expansion(exp, x, skip=(term_index,)) if len(exp.terms) > 1 else 0
    e = log_q(term.lam, q)
    scale = np.exp(e * u * math.log(q)) * u ** term.k
    return (Xv - others) / scale, term(u)
