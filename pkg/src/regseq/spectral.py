"""Spectrum of C = sum A_r and joint-spectral-radius bounds.

Integral matrices go through the exact characteristic polynomial
(Faddeev-LeVerrier over the integers) and a square-free factorisation,
so algebraic multiplicities are exact and only simple roots are found
numerically.  Other matrices use a dense eigen-solve plus clustering.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .linrep import LinearRepresentation, _is_integral

JSR_PRODUCT_CAP = 2**20
EPS_R = 1e-6


def sum_matrix(rep: LinearRepresentation) -> np.ndarray:
    """C = A_0 + ... + A_{q-1} (complex array)."""
    return np.sum(rep.stacked, axis=0)


# --- exact characteristic polynomial ----------------------------------------

def charpoly(C) -> list[int]:
    """Characteristic polynomial det(xI - C) of an integer matrix.

    Coefficients are exact Python ints, highest degree first.
    """
    C = np.asarray(C)
    if not _is_integral([np.asarray(C, dtype=complex)]):
        raise InvalidArgumentError("charpoly needs an integer matrix")
    n = C.shape[0]
    A = np.array([[int(round(complex(t).real)) for t in row] for row in C], dtype=object)
    ident = np.array([[int(i == j) for j in range(n)] for i in range(n)], dtype=object)
    coeffs = [1]
    M = np.zeros((n, n), dtype=object)
    c = 1
    for k in range(1, n + 1):
        M = A.dot(M) + c * ident
        tr = int(np.trace(A.dot(M)))
        assert tr % k == 0
        c = -tr // k
        coeffs.append(c)
    return coeffs


def _trim(p):
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _deriv(p):
    n = len(p) - 1
    return _trim([c * (n - i) for i, c in enumerate(p[:-1])]) if n > 0 else [Fraction(0)]


def _divmod(a, b):
    a = list(a)
    b = _trim(b)
    if len(a) < len(b):
        return [Fraction(0)], _trim(a)
    quot = []
    for i in range(len(a) - len(b) + 1):
        f = a[i] / b[0]
        quot.append(f)
        for j in range(len(b)):
            a[i + j] -= f * b[j]
    return _trim(quot), _trim(a[len(a) - len(b) + 1:] or [Fraction(0)])


def _monic(p):
    return [c / p[0] for c in p]


def _gcd(a, b):
    a, b = _trim(a), _trim(b)
    while not (len(b) == 1 and b[0] == 0):
        _, r = _divmod(a, b)
        a, b = b, r
    return _monic(a)


def _sub(a, b):
    n = max(len(a), len(b))
    a = [Fraction(0)] * (n - len(a)) + list(a)
    b = [Fraction(0)] * (n - len(b)) + list(b)
    return _trim([x - y for x, y in zip(a, b)])


def squarefree_factors(coeffs) -> list[tuple[list[Fraction], int]]:
    """Yun's square-free decomposition: [(factor, multiplicity), ...]."""
    f = _monic([Fraction(c) for c in coeffs])
    if len(f) == 1:
        return []
    df = _deriv(f)
    a = _gcd(f, df)
    b, _ = _divmod(f, a)
    c, _ = _divmod(df, a)
    d = _sub(c, _deriv(b))
    out = []
    i = 1
    while len(b) > 1:
        a = _gcd(b, d)
        b, _ = _divmod(b, a)
        c, _ = _divmod(d, a)
        if len(a) > 1:
            out.append((a, i))
        d = _sub(c, _deriv(b))
        i += 1
    return out


def _polish_roots(coeffs, roots, steps=8):
    c = np.array([complex(x) for x in coeffs])
    dc = np.polyder(c) if len(c) > 1 else np.array([0j])
    out = []
    for z in roots:
        for _ in range(steps):
            f = np.polyval(c, z)
            g = np.polyval(dc, z)
            if g == 0:
                break
            step = f / g
            z = z - step
            if abs(step) <= 1e-16 * max(1.0, abs(z)):
                break
        out.append(z)
    return out


# --- eigen data ---------------------------------------------------------------

@dataclass(frozen=True)
class Eigenvalue:
    value: complex
    alg_mult: int
    max_jordan: int


@dataclass
class SpectralSummary:
    eigenvalues: list[Eigenvalue]
    cluster_tol: float
    warnings: list[str] = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.eigenvalues], dtype=complex)

    def m(self, lam, tol=None) -> int:
        """Size of the largest Jordan block at `lam` (0 if not an eigenvalue)."""
        tol = self.cluster_tol if tol is None else tol
        for e in self.eigenvalues:
            if abs(e.value - lam) <= tol:
                return e.max_jordan
        return 0

    def dominant(self, R: float) -> list[Eigenvalue]:
        return [e for e in self.eigenvalues if abs(e.value) > R]


def _rank(M, rel_tol):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def _max_jordan(C, lam, alg_mult, rank_tol):
    d = C.shape[0]
    if alg_mult == 1:
        return 1
    B = C - lam * np.eye(d)
    P = np.eye(d, dtype=complex)
    ranks = []
    for _ in range(d + 1):
        P = P @ B
        ranks.append(_rank(P, rank_tol))
    target = d - alg_mult
    for j, r in enumerate(ranks, start=1):
        if r <= target:
            return min(j, alg_mult)
    for j in range(len(ranks) - 1):
        if ranks[j] == ranks[j + 1]:
            return min(j + 1, alg_mult)
    return alg_mult


def _cluster(values, tol):
    clusters = []
    for z in values:
        for cl in clusters:
            if any(abs(z - w) <= tol for w in cl):
                cl.append(z)
                break
        else:
            clusters.append([z])
    return [(complex(np.mean(cl)), len(cl)) for cl in clusters]


def eigen_data(C, cluster_tol: float | None = None, rank_tol: float = 1e-8) -> SpectralSummary:
    """Eigenvalues of C with algebraic multiplicities and largest Jordan blocks.

    Defaults: ``cluster_tol = 1e-8 (1 + ||C||)``; ranks count singular
    values above ``rank_tol * sigma_max``.
    """
    C = np.asarray(C, dtype=complex)
    d = C.shape[0]
    if cluster_tol is None:
        cluster_tol = 1e-8 * (1 + np.linalg.norm(C, 2))
    if cluster_tol <= 0:
        raise InvalidArgumentError("cluster_tol must be positive")

    if _is_integral([C]):
        pairs = []
        for factor, mult in squarefree_factors(charpoly(C)):
            fc = [complex(x) for x in factor]
            roots = np.roots(fc) if len(fc) > 1 else []
            for z in _polish_roots(factor, roots):
                pairs.append((complex(z), mult))
        # snap numerically real roots of real polynomials onto the real axis
        pairs = [(complex(z.real, 0.0) if abs(z.imag) <= 1e-13 * (1 + abs(z)) else z, m) for z, m in pairs]
    else:
        pairs = _cluster(np.linalg.eigvals(C), cluster_tol)

    pairs.sort(key=lambda t: (-abs(t[0]), -t[0].real, -t[0].imag))
    found = []
    for z, mult in pairs:
        found.append(Eigenvalue(z, mult, _max_jordan(C, z, mult, rank_tol)))
    notes = []
    for i in range(len(found)):
        for j in range(i + 1, len(found)):
            if abs(found[i].value - found[j].value) <= 10 * cluster_tol:
                notes.append(f"eigenvalues {found[i].value:.6g} and {found[j].value:.6g} are within 10*cluster_tol")
    assert sum(e.alg_mult for e in found) == d
    return SpectralSummary(found, cluster_tol, notes)


# --- joint spectral radius ---------------------------------------------------

_NORMS = {
    "row-sum": lambda P: np.abs(P).sum(axis=-1).max(axis=-1),
    "col-sum": lambda P: np.abs(P).sum(axis=-2).max(axis=-1),
    "spectral": lambda P: np.linalg.norm(P, 2, axis=(-2, -1)),
}


@dataclass(frozen=True)
class JsrBound:
    upper: float
    lower: float
    length_tested: int
    norm: str = "row-sum"

    def R(self, eps: float = EPS_R) -> float:
        """Admissible growth bound for the asymptotic analysis."""
        return self.upper + eps


def jsr_bounds(matrices, max_len: int = 8, norm: str = "row-sum", cap: int = JSR_PRODUCT_CAP) -> JsrBound:
    """Bounds for the joint spectral radius from all products up to `max_len`.

    upper = min over l of max ||P||^(1/l) and lower = max rho(P)^(1/l),
    where P runs over products of length l.  Duplicate products are
    collapsed before being extended.
    """
    mats = np.array([np.asarray(m, dtype=complex) for m in matrices])
    if max_len < 1:
        raise InvalidArgumentError("max_len must be >= 1")
    if norm not in _NORMS:
        raise InvalidArgumentError(f"unknown norm {norm!r}; choose from {sorted(_NORMS)}")
    if len(mats) ** max_len > cap:
        raise ResourceLimitError(f"{len(mats)}^{max_len} products exceed the cap {cap}")
    nrm = _NORMS[norm]
    upper = np.inf
    lower = 0.0
    level = mats
    for ell in range(1, max_len + 1):
        if ell > 1:
            level = (level[:, None, :, :] @ mats[None, :, :, :]).reshape(-1, *mats.shape[1:])
        norms = nrm(level) if len(level) else np.zeros(0)
        upper = min(upper, float(norms.max() if len(norms) else 0.0) ** (1.0 / ell))
        if len(level):
            rho = np.abs(np.linalg.eigvals(level)).max(axis=-1)
            lower = max(lower, float(rho.max()) ** (1.0 / ell))
        # drop zero products and duplicates
        keep = norms > 0
        level = level[keep]
        if len(level):
            keys = np.round(level.view(float).reshape(len(level), -1), 12)
            _, first = np.unique(keys, axis=0, return_index=True)
            level = level[np.sort(first)]
        else:
            break
    # rho(P)^(1/l) <= JSR <= every upper candidate; clamp rounding noise
    return JsrBound(upper=upper, lower=min(lower, upper), length_tested=max_len, norm=norm)
