"""Pseudo-Tauberian step: from periodic fluctuations Phi_j to Psi_j.

Given 1-periodic Phi_0..Phi_{m-1} (here trigonometric polynomials),

    sum_{1<=n<N} n^kappa sum_{j+k=m-1} (log n)^k/k! Phi_j(log_q n)
        = c + N^{kappa+1} sum_{k+j=m-1, j>=-1} (log N)^k/k! Psi_j(log_q N) + O(N^{Re kappa+1-beta}).

The Psi_j are produced two ways:

* by power-series division of the Fourier coefficients,
  sum_j phi_{jl} Z^j = (kappa + 1 + chi_l + Z) sum_{j>=-1} psi_{jl} Z^j + O(Z^m);
* from the generating function Psi(u, Z) = Q^{-u} (I(u, Z) - I(1, Z)/(1 - Q)),
  Q = q^{kappa+1+Z}, followed by Cauchy coefficient extraction in Z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, InvalidArgumentError

UNIT_TOL = 1e-12


def _parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InvalidArgumentError(f"complex value must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(x)


@dataclass
class PeriodicFunctionFamily:
    """Phi_j(u) = sum_l coeffs[j, i] exp(2 pi i indices[i] u) for j < m."""

    indices: np.ndarray
    coeffs: np.ndarray
    kappa: complex
    q: float
    alpha: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        self.kappa = complex(self.kappa)
        self.q = float(self.q)
        if self.coeffs.shape[1] != len(self.indices):
            raise InvalidArgumentError("coeffs must have one column per index")
        if len(set(self.indices.tolist())) != len(self.indices):
            raise InvalidArgumentError("duplicate Fourier indices")
        if not self.q > 1:
            raise InvalidArgumentError("q must be > 1")
        if not 0 < self.beta < self.alpha <= 1:
            raise InvalidArgumentError("need 0 < beta < alpha <= 1")

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def chi(self) -> np.ndarray:
        return 2j * math.pi * self.indices / self.log_q

    @classmethod
    def from_maps(cls, phi, kappa, q, alpha=1.0, beta=0.5):
        """Build from a list of {l: phi_l} maps, one per j."""
        if not phi:
            raise InvalidArgumentError("need at least one function Phi_0")
        idx = sorted({int(l) for mp in phi for l in mp})
        pos = {l: i for i, l in enumerate(idx)}
        C = np.zeros((len(phi), len(idx)), dtype=complex)
        for j, mp in enumerate(phi):
            for l, v in mp.items():
                C[j, pos[int(l)]] = _parse_complex(v)
        return cls(np.array(idx, dtype=np.int64), C, kappa, q, alpha, beta)

    @classmethod
    def from_dict(cls, data: dict):
        try:
            return cls.from_maps(data["phi"], _parse_complex(data.get("kappa", 0)),
                                 data.get("q", 2), data.get("alpha", 1.0), data.get("beta", 0.5))
        except KeyError as exc:
            raise InvalidArgumentError(f"missing field {exc}") from None

    def phi(self, j: int, u):
        u = np.asarray(u, dtype=float)
        return np.exp(2j * np.pi * np.multiply.outer(u, self.indices)) @ self.coeffs[j]

    def phi_hat(self, Z) -> np.ndarray:
        """Fourier coefficients of Phi(u, Z) = sum_j Phi_j(u) Z^j, per index."""
        powers = np.asarray(Z, dtype=complex) ** np.arange(self.m)
        return powers @ self.coeffs


@dataclass
class PsiFamily:
    """psi[j + 1, i] is the coefficient of index indices[i] in Psi_j, j = -1..m-1."""

    indices: np.ndarray
    psi: np.ndarray
    q: float
    flag_q_kappa_unit: bool

    def coefficient(self, j: int, ell: int) -> complex:
        hit = np.nonzero(self.indices == ell)[0]
        return complex(self.psi[j + 1, hit[0]]) if hit.size else 0j

    def evaluate(self, j: int, u):
        u = np.asarray(u, dtype=float)
        return np.exp(2j * np.pi * np.multiply.outer(u, self.indices)) @ self.psi[j + 1]


def q_kappa_unit(fam: PeriodicFunctionFamily) -> bool:
    return abs(fam.q ** (fam.kappa + 1) - 1) <= UNIT_TOL


def build_psi_from_fourier(fam: PeriodicFunctionFamily) -> PsiFamily:
    """Power-series division per Fourier index.

    For a_l = kappa + 1 + chi_l != 0: psi_{-1} = 0, psi_0 = phi_0/a_l,
    psi_j = (phi_j - psi_{j-1})/a_l.  For a_l = 0 the series shifts:
    psi_{j-1} = phi_j, and psi_{m-1}, which the relation leaves free, is 0.
    """
    m = fam.m
    a = fam.kappa + 1 + fam.chi
    psi = np.zeros((m + 1, len(fam.indices)), dtype=complex)
    for i, al in enumerate(a):
        col = fam.coeffs[:, i]
        if abs(al) <= UNIT_TOL:
            psi[0:m, i] = col
        else:
            prev = 0j
            for j in range(m):
                prev = (col[j] - prev) / al
                psi[j + 1, i] = prev
    return PsiFamily(fam.indices.copy(), psi, fam.q, q_kappa_unit(fam))


def effective_alpha(fam: PeriodicFunctionFamily) -> float:
    """alpha, lowered half-way towards beta if Re kappa + 1 sits on it."""
    alpha, beta = fam.alpha, fam.beta
    if abs(fam.kappa.real + 1 - alpha) < (alpha - beta) / 4:
        alpha = alpha - (alpha - beta) / 2
    return alpha


def cauchy_radius(fam: PeriodicFunctionFamily) -> float:
    """r = 0.9 min(alpha - beta, gap to |Q| = q^alpha, nonzero roots of Q = 1) / 2.

    The disc |Z| < 2r then satisfies every restriction used for Psi(u, Z).
    """
    alpha = effective_alpha(fam)
    k1 = fam.kappa + 1
    # Q(Z) = 1 iff Z = -(kappa + 1) + 2 pi i t / log q for an integer t
    step = 2 * math.pi / fam.log_q
    t0 = round(k1.imag / step)
    roots = [abs(-k1 + 1j * step * t) for t in range(t0 - 2, t0 + 3)]
    roots = [d for d in roots if d > UNIT_TOL]
    line = abs(k1.real - alpha)
    r = 0.9 * min([alpha - fam.beta, line] + roots) / 2
    if not r > 0:
        raise DomainError("no admissible Cauchy radius")
    return r


def _check_Z(fam, Z, r=None):
    r = cauchy_radius(fam) if r is None else r
    az = abs(Z)
    if not az < 2 * r:
        raise DomainError(f"|Z| = {az:.6g} must be below 2r = {2 * r:.6g}")
    if az == 0:
        raise DomainError("Z = 0 is excluded")
    if abs(fam.q ** (fam.kappa + 1 + Z) - 1) <= UNIT_TOL:
        raise DomainError("Q(Z) = 1")


def _integral_I(fam, u, Z):
    """I(u, Z) = log q int_0^u Q^w Phi(w, Z) dw, mode by mode in closed form."""
    lq = fam.log_q
    a = fam.kappa + 1 + Z + fam.chi
    b = lq * a
    u = np.asarray(u, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        modes = np.where(a == 0, lq * u[..., None], np.expm1(np.multiply.outer(u, b)) / a)
    return modes @ fam.phi_hat(Z)


def build_psi_by_integral(fam: PeriodicFunctionFamily, u, Z, r=None):
    """Psi(u, Z) = Q^{-u} (I(u, Z) - I(1, Z)/(1 - Q)) for 0 <= u <= 1 and 0 < |Z| < 2r."""
    Z = complex(Z)
    _check_Z(fam, Z, r)
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise DomainError("u must lie in [0, 1]")
    Q = fam.q ** (fam.kappa + 1 + Z)
    I1 = _integral_I(fam, np.array(1.0), Z)
    # Q^{-u} on the branch q^{-(kappa+1+Z) u}, not the principal power of Q
    val = np.exp(-u * fam.log_q * (fam.kappa + 1 + Z)) * (_integral_I(fam, u, Z) - I1 / (1 - Q))
    return complex(val) if val.ndim == 0 else val


def extract_psi_coefficients(fam: PeriodicFunctionFamily, j: int, u, r: float | None = None,
                             M: int = 32, M_max: int = 4096, tol: float = 1e-13):
    """Psi_j(u) = (1/2 pi i) oint_{|Z|=r} Psi(u, Z) Z^{-j-1} dZ by the trapezoidal rule.

    M doubles until two successive estimates agree within ``tol``.
    """
    if j < -1:
        raise InvalidArgumentError("j must be >= -1")
    r = cauchy_radius(fam) if r is None else float(r)
    u = np.atleast_1d(np.asarray(u, dtype=float))

    def estimate(M):
        th = 2 * np.pi * (np.arange(M) + 0.5) / M
        Zs = r * np.exp(1j * th)
        vals = np.array([build_psi_by_integral(fam, u, Z, r) for Z in Zs])
        return (vals * (Zs ** (-j))[:, None]).mean(axis=0)

    prev = estimate(M)
    while True:
        M *= 2
        cur = estimate(M)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, np.max(np.abs(cur))):
            return cur
        if M >= M_max:
            raise AccuracyError("Cauchy coefficient extraction did not converge")
        prev = cur


def psi_by_integral_route(fam: PeriodicFunctionFamily, r: float | None = None) -> PsiFamily:
    """All psi_{jl} via Cauchy extraction followed by an exact DFT in u.

    Psi(., Z) is a trigonometric polynomial with the same support as the
    input, so sampling on a grid finer than the support recovers the
    coefficients without aliasing.
    """
    U = 2 * int(np.max(np.abs(fam.indices))) + 8
    grid = np.arange(U) / U
    psi = np.zeros((fam.m + 1, len(fam.indices)), dtype=complex)
    for j in range(-1, fam.m):
        vals = extract_psi_coefficients(fam, j, grid, r)
        spec = np.fft.fft(vals) / U
        psi[j + 1] = spec[fam.indices % U]
    return PsiFamily(fam.indices.copy(), psi, fam.q, q_kappa_unit(fam))


def fourier_gf_residual(fam: PeriodicFunctionFamily, Z, r=None, samples: int | None = None) -> float:
    """max_l |(kappa+1+chi_l+Z) int Psi(u,Z) e^{-2 l pi i u} du - int Phi(w,Z) e^{-2 l pi i w} dw|."""
    U = samples or 2 * int(np.max(np.abs(fam.indices))) + 8
    grid = np.arange(U) / U
    vals = build_psi_by_integral(fam, grid, Z, r)
    spec = np.fft.fft(vals) / U
    lhs = (fam.kappa + 1 + fam.chi + Z) * spec[fam.indices % U]
    return float(np.max(np.abs(lhs - fam.phi_hat(Z))))


@dataclass
class TauberReport:
    fitted_c: complex
    max_residual: float
    decay_exponent: float
    sample_N: np.ndarray
    residuals: np.ndarray


def tauber_lhs(fam: PeriodicFunctionFamily, N_values, chunk: int = 2**18) -> np.ndarray:
    """sum_{1<=n<N} n^kappa sum_{j+k=m-1} (log n)^k/k! Phi_j(log_q n) at each N."""
    N_values = np.asarray(N_values, dtype=np.int64)
    top = int(N_values.max())
    m = fam.m
    out = np.zeros(len(N_values), dtype=complex)
    order = np.argsort(N_values)
    running = 0j
    pos = 0
    for lo in range(1, top, chunk):
        hi = min(top, lo + chunk)
        n = np.arange(lo, hi, dtype=float)
        ln = np.log(n)
        u = ln / fam.log_q
        terms = np.zeros(len(n), dtype=complex)
        for j in range(m):
            k = m - 1 - j
            terms += ln ** k / math.factorial(k) * fam.phi(j, u)
        terms *= np.exp(fam.kappa * ln)
        csum = running + np.cumsum(terms)
        while pos < len(order) and N_values[order[pos]] <= hi:
            Nv = N_values[order[pos]]
            out[order[pos]] = csum[Nv - 1 - lo] if Nv - 1 >= lo else running
            pos += 1
        running = csum[-1]
    while pos < len(order):
        out[order[pos]] = running
        pos += 1
    return out


def tauber_rhs(fam: PeriodicFunctionFamily, psi: PsiFamily, N_values) -> np.ndarray:
    """N^{kappa+1} sum_{k+j=m-1, j>=-1} (log N)^k/k! Psi_j(log_q N), without c."""
    N = np.asarray(N_values, dtype=float)
    ln = np.log(N)
    u = ln / fam.log_q
    total = np.zeros(N.shape, dtype=complex)
    for j in range(-1, fam.m):
        k = fam.m - 1 - j
        total += ln ** k / math.factorial(k) * psi.evaluate(j, u)
    if fam.kappa.imag == 0:
        return np.power(N, fam.kappa.real + 1) * total
    return np.exp((fam.kappa + 1) * ln) * total


def verify_tauber_relation(fam: PeriodicFunctionFamily, Nmax: int = 10**6, sample_count: int = 40,
                           psi: PsiFamily | None = None) -> TauberReport:
    """Fit c as the mean of LHS - RHS over sampled N and report the residuals.

    ``max_residual`` is max |LHS - RHS - c| / N^{Re kappa + 1 - beta};
    ``decay_exponent`` is the log-log slope of |LHS - RHS - c| / N^{Re kappa + 1}
    against N, i.e. the decay of the residual relative to the main-term scale.
    """
    if Nmax < 1000:
        raise InvalidArgumentError("Nmax must be >= 1000")
    if sample_count < 2:
        raise InvalidArgumentError("sample_count must be >= 2")
    psi = build_psi_from_fourier(fam) if psi is None else psi
    lo = max(10, Nmax // 1000)
    N = np.unique(np.round(np.geomspace(lo, Nmax, sample_count)).astype(np.int64))
    diff = tauber_lhs(fam, N) - tauber_rhs(fam, psi, N)
    c = complex(np.mean(diff))
    res = diff - c
    scaled = np.abs(res) / N.astype(float) ** (fam.kappa.real + 1 - fam.beta)
    absres = np.maximum(np.abs(res) / N.astype(float) ** (fam.kappa.real + 1), 1e-300)
    slope = float(np.polyfit(np.log(N), np.log(absres), 1)[0])
    return TauberReport(c, float(scaled.max()), slope, N, res)
