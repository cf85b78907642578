"""q-esthetic numbers: adjacent digits differ by exactly one.

The automaton has states 0..q-1 (last digit read) plus an initial state
I; every state except 0 accepts.  Reading digits least significant first,
``A_r`` has its only nonzero column at r, with ones in rows r-1, r+1 and I.
The empty word is accepted, so x(0) = 1 while 0 itself is not counted as
esthetic by the digit definition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .linrep import LinearRepresentation, digits
from .spectral import EPS_R


def build_representation(q: int) -> LinearRepresentation:
    """(q+1)-dimensional representation of the esthetic indicator sequence."""
    if q < 2:
        raise InvalidArgumentError(f"q must be >= 2, got {q}")
    d = q + 1
    I = q
    mats = []
    for r in range(q):
        A = np.zeros((d, d), dtype=int)
        for row in (r - 1, r + 1):
            if 0 <= row < q:
                A[row, r] = 1
        A[I, r] = 1
        mats.append(A)
    left = np.zeros(d, dtype=int)
    left[I] = 1
    v0 = np.ones(d, dtype=int)
    v0[0] = 0
    return LinearRepresentation(q, mats, left, v0)


def is_esthetic(n: int, q: int, count_zero: bool = False) -> bool:
    """Digit check |r_j - r_{j-1}| = 1 on the canonical expansion.

    ``n = 0`` has the empty expansion; it is rejected unless ``count_zero``
    (the automaton's convention, which accepts the empty word).
    """
    if n < 0:
        raise InvalidArgumentError(f"n must be nonnegative, got {n}")
    if n == 0:
        return count_zero
    ds = digits(n, q)
    return all(abs(a - b) == 1 for a, b in zip(ds, ds[1:]))


def path_matrix(q: int) -> np.ndarray:
    """Adjacency matrix M of the path 0 - 1 - ... - (q-1)."""
    M = np.zeros((q, q), dtype=object)
    for i in range(q - 1):
        M[i, i + 1] = M[i + 1, i] = 1
    return M


def count_by_length(q: int, length: int) -> int:
    """Number of esthetic numbers with exactly `length` base-q digits."""
    if q < 2:
        raise InvalidArgumentError(f"q must be >= 2, got {q}")
    if length < 1:
        raise InvalidArgumentError(f"length must be >= 1, got {length}")
    M = path_matrix(q)
    row = np.array([0] + [1] * (q - 1), dtype=object)  # leading digit nonzero
    for _ in range(length - 1):
        row = row.dot(M)
    return int(sum(row))


def chebyshev_like(ell: int, x):
    """p_0 = 1, p_1 = x, p_l = x p_{l-1} - p_{l-2}; p_l(2 cos t) = U_l(cos t)."""
    p0, p1 = 1.0 + 0 * x, x
    if ell == 0:
        return p0
    for _ in range(ell - 1):
        p0, p1 = p1, x * p1 - p0
    return p1


def esthetic_eigenvalues(q: int) -> list[float]:
    """2 cos(j pi/(q+1)) for j = 1..q, followed by the extra eigenvalue 0."""
    if q < 2:
        raise InvalidArgumentError(f"q must be >= 2, got {q}")
    lams = [2 * math.cos(j * math.pi / (q + 1)) for j in range(1, q + 1)]
    for lam in lams:
        assert abs(chebyshev_like(q, lam)) < 1e-9, lam
    return lams + [0.0]


def dominant_indices(q: int) -> list[int]:
    """j with 2 cos(j pi/(q+1)) > 1, i.e. j <= ceil((q-2)/3)."""
    return list(range(1, -(-(q - 2) // 3) + 1)) if q >= 2 else []


def error_log_power(q: int) -> int:
    """1 when the eigenvalue 1 occurs (q = -1 mod 3), else 0."""
    return int(q % 3 == 2)


@dataclass
class EstheticAnalysis:
    q: int
    expansion: object
    error_log_power: int
    one_periodic: bool
    one_periodic_verified: bool | None
    log_growth: bool


def asymptotic_analysis(q: int, L: int = 50, *, tolerance: float = 1e-9,
                        odd_tol: float = 1e-6, executor=None) -> EstheticAnalysis:
    """Main terms of the esthetic counting function with 2-periodic fluctuations.

    Each dominant j contributes the pair of eigenvalues +-2cos(j pi/(q+1)),
    collected into one 2-periodic fluctuation with coefficients |l| <= L.
    For even q the odd-index coefficients are checked to vanish.
    """
    from .dirichlet import DirichletEvaluator
    from .fourier import AsymptoticExpansion
    from .symmetry import RootsOfUnityBundle, combine

    if q < 2:
        raise InvalidArgumentError(f"q must be >= 2, got {q}")
    rep = build_representation(q)
    R = 1.0 + EPS_R
    log_R = math.log(R) / math.log(q)
    js = dominant_indices(q)
    power = error_log_power(q)
    if not js:
        exp = AsymptoticExpansion([], log_R, power, q=q)
        return EstheticAnalysis(q, exp, power, q % 2 == 0, None, True)
    lams = [2 * math.cos(j * math.pi / (q + 1)) for j in js]
    # keep every main pole inside the margin: Re s0 - log_q R >= delta
    margin = min(math.log(lam) / math.log(q) for lam in lams) - log_R
    delta = min(0.25, margin * (1 - 1e-6))
    ev = DirichletEvaluator(rep, R=R, delta=delta, tolerance=tolerance,
                            eigenvalues=np.array(esthetic_eigenvalues(q), dtype=complex))
    terms = []
    verified = True if q % 2 == 0 else None
    for lam in lams:
        bundle = RootsOfUnityBundle(lam, 2, 0, [])
        series = combine(bundle, ev, indices=np.arange(-L, L + 1), executor=executor)
        terms.append(series)
        if q % 2 == 0:
            odd = series.coeffs[series.indices % 2 != 0]
            verified = verified and bool(np.all(np.abs(odd) < odd_tol))
    exp = AsymptoticExpansion(terms, log_R, power, q=q)
    return EstheticAnalysis(q, exp, power, q % 2 == 0, verified, False)
