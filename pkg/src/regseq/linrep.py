"""q-linear representations and exact evaluation of the sequence they define.

A representation consists of matrices ``A_0, ..., A_{q-1}``, a left row
vector ``e`` and an initial column vector ``v0``.  For ``n`` with q-ary
digits ``r_0, ..., r_{l-1}`` (least significant first, no leading zero)

    x(n) = e A_{r_0} ... A_{r_{l-1}} v0,

and ``x(0) = e v0``.  Digits are always handled least-significant first.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, RepresentationFormatError, ResourceLimitError

BRUTE_FORCE_LIMIT = 10**7
_INT64_SAFE = 2**62


def digits(n: int, base: int) -> list[int]:
    """Canonical base-`base` expansion of `n`, least significant digit first."""
    if base < 2:
        raise InvalidArgumentError(f"base must be >= 2, got {base}")
    if n < 0:
        raise InvalidArgumentError(f"n must be nonnegative, got {n}")
    out = []
    while n:
        n, r = divmod(n, base)
        out.append(r)
    return out


def from_digits(ds, base: int) -> int:
    value = 0
    for r in reversed(ds):
        value = value * base + r
    return value


def _is_integral(arrays) -> bool:
    for a in arrays:
        if np.iscomplexobj(a) and np.any(a.imag != 0):
            return False
        re = a.real if np.iscomplexobj(a) else a
        if not np.all(np.isfinite(re)) or np.any(re != np.round(re)):
            return False
    return True


def _as_exact(a: np.ndarray) -> np.ndarray:
    re = a.real if np.iscomplexobj(a) else a
    return np.vectorize(lambda t: int(round(t)), otypes=[object])(re)


@dataclass(frozen=True, eq=False)
class LinearRepresentation:
    """Immutable q-linear representation ``(A_0..A_{q-1}, left, v0)``.

    Integral representations (all entries integers) additionally keep exact
    ``object`` arrays of Python ints, used by :func:`evaluate` and
    :func:`summatory_fast` so that sums never drift.
    """

    q: int
    matrices: tuple
    left: np.ndarray
    v0: np.ndarray
    integral: bool = field(init=False)

    def __init__(self, q, matrices, left, v0):
        q = int(q)
        if q < 2:
            raise InvalidArgumentError(f"q must be >= 2, got {q}")
        mats = [np.array(m, dtype=complex) for m in matrices]
        left = np.array(left, dtype=complex).reshape(-1)
        v0 = np.array(v0, dtype=complex).reshape(-1)
        if len(mats) != q:
            raise InvalidArgumentError(f"expected {q} matrices, got {len(mats)}")
        d = left.shape[0]
        if d < 1:
            raise InvalidArgumentError("dimension must be >= 1")
        for r, m in enumerate(mats):
            if m.shape != (d, d):
                raise InvalidArgumentError(f"matrix A_{r} has shape {m.shape}, expected {(d, d)}")
        if v0.shape != (d,):
            raise InvalidArgumentError(f"v0 has length {v0.shape[0]}, expected {d}")
        for a in (*mats, left, v0):
            a.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "matrices", tuple(mats))
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "v0", v0)
        integral = _is_integral([*mats, left, v0])
        object.__setattr__(self, "integral", integral)
        if integral:
            object.__setattr__(self, "_exact", ([_as_exact(m) for m in mats], _as_exact(left), _as_exact(v0)))

    @property
    def d(self) -> int:
        return self.left.shape[0]

    @property
    def stacked(self) -> np.ndarray:
        """All matrices as one ``(q, d, d)`` complex array."""
        return np.stack(self.matrices)

    def is_real(self) -> bool:
        return all(not np.any(a.imag) for a in (*self.matrices, self.left, self.v0))

    def is_zero_stable(self) -> bool:
        """Whether ``A_0 v0 == v0``, i.e. leading zeros do not change x(n)."""
        return bool(np.allclose(self.matrices[0] @ self.v0, self.v0, rtol=0, atol=1e-12))

    def __repr__(self):
        return f"LinearRepresentation(q={self.q}, d={self.d}, integral={self.integral})"


def evaluate(rep: LinearRepresentation, n: int):
    """x(n); a Python int for integral representations, complex otherwise."""
    if n < 0:
        raise InvalidArgumentError(f"n must be nonnegative, got {n}")
    if rep.integral:
        mats, left, v0 = rep._exact
        row = left
        for r in digits(n, rep.q):
            row = row.dot(mats[r])
        return int(row.dot(v0))
    row = rep.left
    for r in digits(n, rep.q):
        row = row @ rep.matrices[r]
    return complex(row @ rep.v0)


def vector_sequence(rep: LinearRepresentation, n: int) -> np.ndarray:
    """v(n) = A_{r_0} ... A_{r_{l-1}} v0 (v(0) = v0)."""
    if n < 0:
        raise InvalidArgumentError(f"n must be nonnegative, got {n}")
    if rep.integral:
        mats, _, v = rep._exact
        for r in reversed(digits(n, rep.q)):
            v = mats[r].dot(v)
        return v
    v = rep.v0
    for r in reversed(digits(n, rep.q)):
        v = rep.matrices[r] @ v
    return v


def vector_table(rep: LinearRepresentation, N: int, exact: bool | None = None) -> np.ndarray:
    """Rows v(0), ..., v(N-1) as an ``(N, d)`` array.

    Integral representations give int64 rows (object dtype if int64 could
    overflow) unless ``exact=False``, which forces complex128.
    """
    if exact is None:
        exact = rep.integral
    exact = exact and rep.integral
    q, d = rep.q, rep.d
    if exact:
        mats, _, v0 = rep._exact
        levels = max(1, math.ceil(math.log(max(N, 2), q)) + 1)
        growth = max(sum(abs(int(t)) for t in row) for m in mats for row in m) or 1
        bound = max(abs(int(t)) for t in v0) * growth ** levels if len(v0) else 0
        dtype = np.int64 if bound < _INT64_SAFE else object
        mats_np = [np.array(m, dtype=dtype) for m in mats]
        table = np.zeros((max(N, 1), d), dtype=dtype)
        table[0] = np.array(v0, dtype=dtype)
    else:
        mats_np = list(rep.matrices)
        table = np.zeros((max(N, 1), d), dtype=complex)
        table[0] = rep.v0
    if N <= 1:
        return table[:N]
    for r in range(1, min(q, N)):
        table[r] = mats_np[r].dot(table[0])
    lo = q
    while lo < N:
        hi = min(lo * q, N)
        idx = np.arange(lo, hi)
        parents, rs = np.divmod(idx, q)
        for r in range(q):
            sel = rs == r
            if np.any(sel):
                table[idx[sel]] = table[parents[sel]].dot(mats_np[r].T)
        lo = hi
    return table


def _exact_or_float(rep):
    if rep.integral:
        mats, left, v0 = rep._exact
        return list(mats), left, v0
    return list(rep.matrices), rep.left, rep.v0


def summatory_brute(rep: LinearRepresentation, N: int, limit: int = BRUTE_FORCE_LIMIT):
    """X(N) = sum_{0 <= n < N} x(n) by tabulating every summand."""
    if N < 0:
        raise InvalidArgumentError(f"N must be nonnegative, got {N}")
    if N > limit:
        raise ResourceLimitError(f"N={N} exceeds the brute-force limit {limit}")
    if N == 0:
        return 0 if rep.integral else 0j
    table = vector_table(rep, N)
    if rep.integral:
        left = np.array(rep._exact[1], dtype=table.dtype)
        col = table.sum(axis=0)
        return int(sum(int(a) * int(b) for a, b in zip(left, col)))
    return complex(rep.left @ table.sum(axis=0))


def _fast_data(rep):
    """Digit matrices, prefix sums A_0 + ... + A_{r-1} and (C - A_0) v0, cached on rep.

    For integral reps an int64 copy is cached as well, together with the
    number of bits needed per digit to bound every intermediate value:
    row vectors are left times at most L factors of norm <= max(||C||, 1),
    column vectors v0 times at most L factors of norm <= max(||A_r||, 1).
    """
    cached = rep.__dict__.get("_fast")
    if cached is None:
        mats, left, v0 = _exact_or_float(rep)
        prefix = [mats[0] * 0]
        for m in mats:
            prefix.append(prefix[-1] + m)
        data = (mats, left, v0, prefix, (prefix[-1] - mats[0]).dot(v0))
        small = None
        if rep.integral:
            def norm(m):
                return max(1, max(sum(abs(int(x)) for x in row) for row in m))
            per_digit = 2 * math.log2(max(norm(m) for m in prefix))
            base = (math.log2(max(1, sum(abs(int(x)) for x in left)))
                    + math.log2(max(1, max(abs(int(x)) for x in v0))))
            small = (tuple(a.astype(np.int64) if isinstance(a, np.ndarray) else [m.astype(np.int64) for m in a]
                           for a in data), base, per_digit)
        cached = (data, small)
        object.__setattr__(rep, "_fast", cached)
    return cached


def summatory_fast(rep: LinearRepresentation, N: int):
    """X(N) by a digit recursion over the prefixes of N.

    Numbers below N either have fewer digits than N (summed with powers of
    C = sum A_r) or share a prefix with N and carry a smaller digit at the
    first position where they differ.  Cost is O(d^2 q log_q N).
    """
    if N < 0:
        raise InvalidArgumentError(f"N must be nonnegative, got {N}")
    exact = rep.integral
    if N == 0:
        return 0 if exact else 0j
    data, small = _fast_data(rep)
    q = rep.q
    nd = digits(N, q)
    L = len(nd)
    if small is not None and small[1] + L * small[2] + math.log2(4 * L * rep.d + 4) < 62:
        data = small[0]
    mats, left, v0, prefix, w = data
    C = prefix[q]

    total = left.dot(v0)
    # numbers with 1..L-1 digits: e C^(l-1) (C - A_0) v0
    row = left
    for _ in range(1, L):
        total = total + row.dot(w)
        row = row.dot(C)

    # L-digit numbers below N, split at the highest differing position i
    suffix = [None] * L
    u = v0
    for i in range(L - 1, -1, -1):
        suffix[i] = u
        u = mats[nd[i]].dot(u)
    row = left
    for i in range(L):
        lo = 1 if i == L - 1 else 0
        hi = nd[i]
        if hi > lo:
            total = total + row.dot((prefix[hi] - prefix[lo]).dot(suffix[i]))
        row = row.dot(C)
    return int(total) if exact else complex(total)


def zero_stabilized(rep: LinearRepresentation) -> LinearRepresentation:
    """Equivalent representation of dimension 2d with ``A_0 v0 == v0``.

    The extra block tracks whether the word read so far is empty, so the
    same x(n) results even if leading zeros are appended.
    """
    d = rep.d
    I = np.eye(d)
    Z = np.zeros((d, d))
    mats = []
    for r, A in enumerate(rep.matrices):
        if r == 0:
            mats.append(np.block([[A, Z], [Z, I]]))
        else:
            mats.append(np.block([[A, A], [Z, Z]]))
    left = np.concatenate([rep.left, rep.left])
    v0 = np.concatenate([np.zeros(d), rep.v0])
    return LinearRepresentation(rep.q, mats, left, v0)


def power(rep: LinearRepresentation, p: int) -> LinearRepresentation:
    """Base-q^p representation with ``B_r = A_{r_0} ... A_{r_{p-1}}``.

    ``r_0..r_{p-1}`` are the zero-padded base-q digits of r.  Padding the
    top digit only changes x(n) when ``A_0 v0 != v0``; such representations
    are passed through :func:`zero_stabilized` first, doubling d.
    """
    if p < 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    if p == 1:
        return rep
    base = rep if rep.is_zero_stable() else zero_stabilized(rep)
    q = base.q
    mats = []
    for r in range(q**p):
        ds = digits(r, q)
        ds += [0] * (p - len(ds))
        B = np.eye(base.d, dtype=complex)
        for t in ds:
            B = B @ base.matrices[t]
        mats.append(B)
    return LinearRepresentation(q**p, mats, base.left, base.v0)


# --- JSON file format -------------------------------------------------------

def _parse_entry(x):
    if isinstance(x, bool):
        raise RepresentationFormatError(f"invalid numeric entry {x!r}")
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, list) and len(x) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        re, im = x
        return re if im == 0 else complex(re, im)
    raise RepresentationFormatError(f"invalid numeric entry {x!r}; expected number or [re, im]")


def _parse_vector(v, d, name):
    if not isinstance(v, list) or len(v) != d:
        raise RepresentationFormatError(f"{name} must be a list of length {d}")
    return [_parse_entry(x) for x in v]


def from_dict(data: dict) -> LinearRepresentation:
    """Build a representation from the JSON object layout (validated)."""
    if not isinstance(data, dict):
        raise RepresentationFormatError("representation must be a JSON object")
    for key in ("q", "matrices", "left", "v0"):
        if key not in data:
            raise RepresentationFormatError(f"missing key {key!r}")
    q = data["q"]
    if not isinstance(q, int) or isinstance(q, bool) or q < 2:
        raise RepresentationFormatError(f"q must be an integer >= 2, got {q!r}")
    mats = data["matrices"]
    d = data.get("d", len(data["left"]) if isinstance(data["left"], list) else None)
    if not isinstance(d, int) or d < 1:
        raise RepresentationFormatError(f"d must be a positive integer, got {d!r}")
    if not isinstance(mats, list) or len(mats) != q:
        raise RepresentationFormatError(f"matrices must be a list of {q} matrices")
    parsed = []
    for r, m in enumerate(mats):
        if not isinstance(m, list) or len(m) != d:
            raise RepresentationFormatError(f"matrix A_{r} must have {d} rows")
        parsed.append([_parse_vector(row, d, f"row of A_{r}") for row in m])
    left = _parse_vector(data["left"], d, "left")
    v0 = _parse_vector(data["v0"], d, "v0")
    return LinearRepresentation(q, parsed, left, v0)


def _entry_to_json(z):
    z = complex(z)
    if z.imag == 0:
        re = z.real
        return int(re) if re == int(re) and abs(re) < 2**53 else re
    return [z.real, z.imag]


def to_dict(rep: LinearRepresentation) -> dict:
    return {
        "q": rep.q,
        "d": rep.d,
        "matrices": [[[_entry_to_json(t) for t in row] for row in m] for m in rep.matrices],
        "left": [_entry_to_json(t) for t in rep.left],
        "v0": [_entry_to_json(t) for t in rep.v0],
    }


def load(path) -> LinearRepresentation:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RepresentationFormatError(f"cannot read representation {path}: {exc}") from exc
    return from_dict(data)


def dump(rep: LinearRepresentation, path) -> None:
    Path(path).write_text(json.dumps(to_dict(rep)) + "\n")


# --- small library of representations used throughout ----------------------

def constant_sequence(q: int = 2) -> LinearRepresentation:
    """x(n) = 1 for all n; its Dirichlet series is the Riemann zeta function."""
    return LinearRepresentation(q, [[[1]]] * q, [1], [1])


def binary_sum_of_digits() -> LinearRepresentation:
    """Binary sum of digits s(n), with v(n) = (s(n), 1)."""
    return LinearRepresentation(2, [[[1, 0], [0, 1]], [[1, 1], [0, 1]]], [1, 0], [0, 1])
