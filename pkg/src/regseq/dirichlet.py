"""Dirichlet series V(s) = sum_{n>=1} n^{-s} v(n) of a q-linear representation.

Two evaluation routes are provided.

``direct``
    Partial sum with an explicit tail bound; only usable well inside the
    half plane of absolute convergence, Re s > log_q R + 1.

``values`` / ``continued``
    Meromorphic continuation to Re s > log_q R.  For a cut-off ``n0`` the
    tail ``T(s) = sum_{n>=n0} n^{-s} v(n)`` satisfies

        (I - q^{-s} C) T(s) = sum_{n0<=n<q n0} n^{-s} v(n)
                              + q^{-s} sum_{j>=1} binom(-s, j) D_j T(s+j),

    with ``D_j = sum_r (r/q)^j A_r``.  Choosing ``n0`` proportional to |s|
    keeps the binomial series short even far up the critical strip.  The
    shifted tails ``T(s+k)`` are found top-down: for large ``k`` the block
    sum alone is accurate, lower rungs follow from the equation above.
    For ``n0 = 1`` this is exactly the functional equation of V itself,
    which :meth:`DirichletEvaluator.functional_equation_residual` checks
    independently.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import AccuracyError, DomainError, InvalidArgumentError, NearPoleError
from .linrep import LinearRepresentation, evaluate, vector_table
from .spectral import EPS_R, eigen_data, jsr_bounds, sum_matrix

TABLE_SIZE = 2**14
MAX_DIRECT_TERMS = 10**7
# cap on (points in a batch) x (terms per point) in one exp/matmul call
BATCH_BUDGET = 2**22
# n0 is chosen so that |s| (q-1)/(q n0) <= BINOMIAL_SPREAD
BINOMIAL_SPREAD = 3.0
N0_MIN = 8


def default_jsr_length(q: int) -> int:
    return max(1, min(10, int(math.log(2**16) / math.log(q))))


class DirichletEvaluator:
    """Evaluator of V(s) and X(s) = left . V(s) for one representation.

    Parameters mirror the defaults used throughout: ``R`` defaults to the
    enumerated JSR upper bound plus ``eps_R``; ``delta`` is the safety margin
    to the boundary Re s = log_q R; ``tolerance`` is the absolute accuracy
    target; ``pole_tol`` guards q^s against the spectrum of C.
    """

    def __init__(self, rep: LinearRepresentation, R: float | None = None, *,
                 delta: float = 0.25, tolerance: float = 1e-9,
                 max_terms: int = MAX_DIRECT_TERMS, pole_tol: float = 1e-4,
                 eps_R: float = EPS_R, eigenvalues=None):
        if R is None:
            R = jsr_bounds(rep.matrices, default_jsr_length(rep.q)).R(eps_R)
        if not R > 0:
            raise InvalidArgumentError(f"R must be positive, got {R}")
        if not delta > 0 or not tolerance > 0:
            raise InvalidArgumentError("delta and tolerance must be positive")
        self.rep = rep
        self.q = rep.q
        self.d = rep.d
        self.log_q = math.log(rep.q)
        self.R = float(R)
        self.log_R = math.log(self.R) / self.log_q
        self.delta = float(delta)
        self.tolerance = float(tolerance)
        self.max_terms = int(max_terms)
        self.pole_tol = float(pole_tol)
        self.C = sum_matrix(rep)
        if eigenvalues is None:
            eigenvalues = eigen_data(self.C).values
        self.eigenvalues = np.asarray(eigenvalues, dtype=complex)
        self.x0 = complex(evaluate(rep, 0))
        self.left = rep.left
        self._real = rep.is_real()
        self._mats = rep.stacked
        self._table = vector_table(rep, TABLE_SIZE, exact=False)
        if self._real:
            self._table = self._table.real.copy()
        n = np.arange(1, TABLE_SIZE)
        norms = np.abs(self._table[1:]).max(axis=1)
        self.growth = 2.0 * max(1e-300, float(np.max(norms / n ** self.log_R)))
        q = self.q
        # D_hat_j = sum_r (r/(q-1))^j A_r; the factor ((q-1)/(q n0))^j is applied per batch
        self._dhat = np.array([sum((r / (q - 1)) ** j * self._mats[r] for r in range(q))
                               for j in range(0, 401)])

    # -- sequence blocks ------------------------------------------------------

    def _ensure_table(self, size):
        if size > len(self._table):
            new = max(size, 2 * len(self._table))
            table = vector_table(self.rep, new, exact=False)
            self._table = table.real.copy() if self._real else table

    def _block(self, lo: int, hi: int) -> np.ndarray:
        """Rows v(n) for lo <= n < hi without tabulating everything below lo."""
        tab = self._table
        if hi <= len(tab):
            return tab[lo:hi]
        if lo < len(tab):
            return np.concatenate([tab[lo:], self._block(len(tab), hi)])
        q = self.q
        plo, phi = lo // q, (hi - 1) // q + 1
        parent = self._block(plo, phi)
        idx = np.arange(lo, hi)
        par, rs = np.divmod(idx, q)
        out = np.empty((hi - lo, self.d), dtype=tab.dtype)
        for r in range(q):
            sel = rs == r
            if np.any(sel):
                A = self._mats[r].real if self._real else self._mats[r]
                out[sel] = parent[par[sel] - plo] @ A.T
        return out

    # -- direct summation -----------------------------------------------------

    def direct(self, s, return_bound: bool = False):
        """V(s) by partial summation plus a tail bound below ``tolerance``.

        The tail is bounded by ``sum_{n>N0} c n^{a - Re s}`` with
        ``a = log_q R`` and ``c`` twice the largest observed ratio
        ``||v(n)|| / n^a``.
        """
        s = complex(s)
        sigma = s.real
        a = self.log_R
        if sigma < a + 1 + self.delta:
            raise DomainError(f"direct summation needs Re s >= {a + 1 + self.delta:.6g}, got {sigma}")
        total = np.zeros(self.d, dtype=complex)
        growth = self.growth
        lo, N0, chunk = 1, 2**12, 2**16
        while True:
            while lo <= N0:
                hi = min(N0 + 1, lo + chunk)
                V = self._block(lo, hi)
                n = np.arange(lo, hi, dtype=float)
                total += np.exp(-s * np.log(n)) @ V
                growth = max(growth, 2.0 * float(np.max(np.abs(V).max(axis=1) / n ** a)))
                lo = hi
            bound = growth * N0 ** (1 - sigma + a) / (sigma - 1 - a)
            if bound < self.tolerance:
                return (total, bound) if return_bound else total
            if N0 >= self.max_terms:
                raise AccuracyError(
                    f"tail bound {bound:.3g} above tolerance {self.tolerance:.3g} at N0={N0}")
            N0 = min(2 * N0, self.max_terms)

    # -- continuation ---------------------------------------------------------

    def _plan(self, smax: float, sigma_min: float):
        """Cut-off n0, rung count K and binomial length J for one batch."""
        q, a, tol = self.q, self.log_R, self.tolerance
        n0 = max(N0_MIN, math.ceil(smax * (q - 1) / (q * BINOMIAL_SPREAD)))
        x = (q - 1) / (q * n0)
        grow = self.growth * n0 ** max(0.0, 1 - sigma_min + a)
        K = 1
        while True:
            e = K + sigma_min - 1 - a
            if e > 0 and grow * q ** (1 - sigma_min + a - K) / e < 1e-3 * tol:
                break
            K += 1
            if K > 400:
                raise AccuracyError("cannot bound the truncated tail")
        dnorm = max(1.0, float(np.abs(self._dhat[1]).sum(axis=1).max()))
        term, J, peaked = 1.0, 0, False
        while J < 400:
            J += 1
            term *= (smax + K + J - 1) / J * x
            if term < 1.0:
                peaked = True
            if peaked and term * dnorm * grow < 1e-3 * tol:
                break
        else:
            raise AccuracyError("binomial series does not converge fast enough")
        return n0, K, J, x

    def _values_batch(self, s: np.ndarray) -> np.ndarray:
        q, d = self.q, self.d
        smax = float(np.max(np.abs(s)))
        n0, K, J, x = self._plan(smax, float(np.min(s.real)))
        top = q * n0
        self._ensure_table(top)
        V = self._table[1:top]
        logn = np.log(np.arange(1, top, dtype=float))
        if self._real:
            # contiguous real and imaginary parts keep the products on fast BLAS paths
            mag = np.exp(-np.outer(s.real, logn))
            ph = np.outer(s.imag, logn)
            W = (mag * np.cos(ph), -mag * np.sin(ph))
        else:
            W = np.exp(-s[:, None] * logn[None, :])

        def mul(cols, M):
            if self._real:
                return np.ascontiguousarray(W[0][:, cols]) @ M + 1j * (np.ascontiguousarray(W[1][:, cols]) @ M)
            return W[:, cols] @ M

        head = mul(slice(0, n0 - 1), V[:n0 - 1]) if n0 > 1 else np.zeros((len(s), d), complex)
        nb = np.arange(n0, top, dtype=float)
        ks = np.arange(K + J)
        scale = (n0 / nb)[:, None] ** ks[None, :]
        Vk = (V[n0 - 1:, None, :] * scale[:, :, None]).reshape(len(nb), -1)
        U = mul(slice(n0 - 1, None), Vk).reshape(len(s), K + J, d)

        dstack = (self._dhat[1:J + 1] * (x ** np.arange(1, J + 1))[:, None, None])
        dstack = dstack.transpose(0, 2, 1).reshape(J * d, d)
        eye = np.eye(d)
        jj = np.arange(1, J + 1)
        for k in range(K - 1, -1, -1):
            sk = s + k
            # binom(-s-k, j) for j = 1..J
            c = np.cumprod((-sk[:, None] - jj[None, :] + 1) / jj[None, :], axis=1)
            Z = (c[:, :, None] * U[:, k + 1:k + J + 1]).reshape(len(s), J * d)
            qs = q ** (-sk)
            rhs = U[:, k] + qs[:, None] * (Z @ dstack)
            M = eye[None] - qs[:, None, None] * self.C[None]
            U[:, k] = np.linalg.solve(M, rhs[..., None])[..., 0]
            if k == 0:
                res = np.abs(np.einsum("pab,pb->pa", M, U[:, 0]) - rhs).max(axis=1)
                if np.any(res > self.tolerance * (1 + np.abs(rhs).max(axis=1))):
                    raise AccuracyError("linear solve residual above tolerance (too close to a pole?)")
        return head + U[:, 0]

    def values(self, s) -> np.ndarray:
        """V(s) for an array of points with Re s > log_q R; shape ``(P, d)``.

        No margin or pole checks beyond the open half plane; callers such as
        the residue routines enforce their own geometry.
        """
        s = np.atleast_1d(np.asarray(s, dtype=complex)).ravel()
        if s.size == 0:
            return np.zeros((0, self.d), complex)
        if np.any(s.real <= self.log_R):
            raise DomainError(f"continuation only exists for Re s > log_q R = {self.log_R:.6g}")
        out = np.empty((len(s), self.d), dtype=complex)
        order = np.argsort(np.abs(s), kind="stable")
        i = 0
        while i < len(s):
            # grow the batch while the matrix of n^{-s} stays within budget
            j = i + 1
            while j < len(s):
                n0 = max(N0_MIN, math.ceil(abs(s[order[j]]) * (self.q - 1) / (self.q * BINOMIAL_SPREAD)))
                if (j + 1 - i) * self.q * n0 > BATCH_BUDGET:
                    break
                j += 1
            idx = order[i:j]
            out[idx] = self._values_batch(s[idx])
            i = j
        return out

    def continued(self, s) -> np.ndarray:
        """V(s) for one point of the continuation strip Re s >= log_q R + delta."""
        s = complex(s)
        if s.real < self.log_R + self.delta:
            raise DomainError(f"need Re s >= {self.log_R + self.delta:.6g}, got {s.real}")
        self.check_pole_distance(s)
        return self.values([s])[0]

    def check_pole_distance(self, s) -> None:
        qs = self.q ** complex(s)
        if self.eigenvalues.size and np.min(np.abs(qs - self.eigenvalues)) <= self.pole_tol:
            raise NearPoleError(f"q^s = {qs:.6g} is within {self.pole_tol} of the spectrum of C")

    def x_values(self, s) -> np.ndarray:
        """X(s) = left . V(s)."""
        return self.values(s) @ self.left

    def residue_integrand(self, s) -> np.ndarray:
        """(x(0) + X(s)) / s, whose residues give the Fourier coefficients."""
        s = np.atleast_1d(np.asarray(s, dtype=complex)).ravel()
        return (self.x0 + self.x_values(s)) / s

    def pole_points(self, center: complex, radius: float) -> list[complex]:
        """All s with q^s in the spectrum of C and |s - center| <= radius."""
        pts = []
        step = 2 * math.pi / self.log_q
        for mu in self.eigenvalues:
            if mu == 0:
                continue
            base = np.log(mu) / self.log_q
            m0 = round((center.imag - base.imag) / step)
            for m in range(m0 - 1 - int(radius / step), m0 + 2 + int(radius / step)):
                z = base + 1j * step * m
                if abs(z - center) <= radius:
                    pts.append(complex(z))
        return pts

    # -- verification helper ------------------------------------------------

    def functional_equation_residual(self, s) -> float:
        """max-norm of LHS - RHS of the functional equation of V at s.

        The left side uses V(s), the right side the series over V(s+k),
        k >= 1; both come from :meth:`values` but the identity itself (the
        n0 = 1 equation) is never used to compute them.
        """
        s = complex(s)
        if s.real < self.log_R + self.delta / 2:
            raise DomainError(f"need Re s >= {self.log_R + self.delta / 2:.6g}")
        self.check_pole_distance(s)
        q, d = self.q, self.d
        lhs = (np.eye(d) - q ** (-s) * self.C) @ self.values([s])[0]
        sigma = s.real
        # |V(s+k)| <= growth * (1 + 1/(sigma - a)) for k >= 1
        vmax = self.growth * (1 + 1 / max(1e-3, sigma - self.log_R))
        ratio = (q - 1) / q
        log_t, k, peaked, terms = 0.0, 0, False, []
        coef = 1.0 + 0j
        while True:
            k += 1
            coef *= (-s - k + 1) / k
            log_t = math.log(abs(coef)) + k * math.log(ratio) if coef != 0 else -math.inf
            terms.append(coef)
            if abs((s + k - 1) / k) * ratio < 1:
                peaked = True
            if peaked and math.exp(log_t) * vmax * q < 1e-3 * self.tolerance:
                break
            if k > 20000:
                raise AccuracyError("binomial series in the functional equation does not converge")
        ks = np.arange(1, k + 1)
        shifted = self.values(s + ks)
        D = np.array([sum((r / q) ** j * self._mats[r] for r in range(q)) for j in ks])
        acc = np.einsum("k,kab,kb->a", np.array(terms), D, shifted)
        head = sum(n ** (-s) * self._table[n] for n in range(1, q))
        rhs = head + q ** (-s) * acc
        return float(np.abs(lhs - rhs).max())
