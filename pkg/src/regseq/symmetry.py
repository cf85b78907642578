"""Collecting the fluctuations of zeta*lambda, zeta^p = 1, into one p-periodic function.

If lambda, zeta lambda, ..., zeta^{p-1} lambda are all eigenvalues, their
contributions combine to

    N^{log_q lambda} (log_q N)^k Phi(log_q N),   Phi(u + p) = Phi(u),

whose l-th coefficient is the residue at log_q lambda + 2 l pi i/(p log q).
Equivalently member j (eigenvalue exp(2 j pi i/p) lambda) supplies the
coefficients with index l' p + j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .fourier import FluctuationSeries, log_q, residue_coefficients

ROOT_TOL = 1e-9


def j0(lam, p: int) -> int:
    """Smallest j with -pi < arg(lam) + 2 j pi/p <= pi."""
    lam = complex(lam)
    if lam == 0:
        raise InvalidArgumentError("lambda must be nonzero")
    if p < 1:
        raise InvalidArgumentError("p must be >= 1")
    arg = math.atan2(lam.imag, lam.real)
    return math.floor(-p * (math.pi + arg) / (2 * math.pi)) + 1


def member_eigenvalues(lam, p: int) -> list[complex]:
    """zeta_j lam for j = j0 .. j0+p-1."""
    start = j0(lam, p)
    return [complex(lam) * np.exp(2j * math.pi * j / p) for j in range(start, start + p)]


@dataclass
class RootsOfUnityBundle:
    lam: complex
    p: int
    k: int = 0
    members: list = field(default_factory=list)

    def __post_init__(self):
        self.lam = complex(self.lam)
        if self.p < 1:
            raise InvalidArgumentError("p must be >= 1")
        if self.k < 0:
            raise InvalidArgumentError("k must be >= 0")
        if self.members:
            if len(self.members) != self.p:
                raise InvalidArgumentError(f"bundle needs {self.p} members, got {len(self.members)}")
            for want, m in zip(member_eigenvalues(self.lam, self.p), self.members):
                if abs(complex(m.lam) - want) > ROOT_TOL * max(1.0, abs(want)):
                    raise InvalidArgumentError(f"member eigenvalue {m.lam} is not {want}")
                if m.k != self.k or m.period != 1:
                    raise InvalidArgumentError("members must share k and have period 1")


def check_spectrum(ev, lam, p: int) -> None:
    """Reject bundles whose rotated eigenvalues are not all in the spectrum."""
    spec = np.asarray(ev.eigenvalues, dtype=complex)
    for mu in member_eigenvalues(lam, p):
        if spec.size == 0 or np.min(np.abs(spec - mu)) > ROOT_TOL * max(1.0, abs(mu)):
            raise InvalidArgumentError(f"{mu:.12g} is not an eigenvalue; the bundle does not apply")


def make_bundle(ev, lam, p: int, k: int, L: int, *, rho=None, executor=None) -> RootsOfUnityBundle:
    """Bundle whose members carry coefficients |l| <= L computed per eigenvalue."""
    check_spectrum(ev, lam, p)
    idx = np.arange(-L, L + 1)
    members = []
    for mu in member_eigenvalues(lam, p):
        c = residue_coefficients(ev, mu, idx, (k,), rho=rho, executor=executor)[0]
        members.append(FluctuationSeries(mu, k, 1, idx, c))
    return RootsOfUnityBundle(lam, p, k, members)


def interleave(bundle: RootsOfUnityBundle) -> FluctuationSeries:
    """Combined series from the members: index l' p + j takes member j's l'."""
    if not bundle.members:
        raise InvalidArgumentError("bundle has no members to interleave")
    p = bundle.p
    start = j0(bundle.lam, p)
    idx, coeffs = [], []
    for j, m in zip(range(start, start + p), bundle.members):
        idx.append(m.indices * p + j)
        coeffs.append(m.coeffs)
    idx = np.concatenate(idx)
    coeffs = np.concatenate(coeffs)
    order = np.argsort(idx, kind="stable")
    return FluctuationSeries(bundle.lam, bundle.k, p, idx[order], coeffs[order])


def combine(bundle: RootsOfUnityBundle, ev, indices=None, *, rho=None, executor=None) -> FluctuationSeries:
    """Period-p series with coefficients from residues at log_q lam + 2 l pi i/(p log q).

    ``indices`` defaults to the interleaved index set of the members.  For
    p = 1 with a member present, that member is returned unchanged.
    """
    p = bundle.p
    if p == 1 and bundle.members and indices is None:
        return bundle.members[0]
    if indices is None:
        if not bundle.members:
            raise InvalidArgumentError("need indices or bundle members")
        indices = interleave(bundle).indices
    check_spectrum(ev, bundle.lam, p)
    indices = np.asarray(indices, dtype=np.int64)
    c = residue_coefficients(ev, bundle.lam, indices, (bundle.k,), period=p, rho=rho,
                             executor=executor)[0]
    return FluctuationSeries(bundle.lam, bundle.k, p, indices, c)


def pointwise_consistency(bundle: RootsOfUnityBundle, combined: FluctuationSeries, N_values, q) -> float:
    """Largest relative deviation between the two sides of the collection identity.

    Left: sum over members of N^{log_q mu} (log_q N)^k Phi_mu(log_q N).
    Right: N^{log_q lam} (log_q N)^k Phi(log_q N) with the combined Phi.
    Deviation at each N is |L - R| / max(1, |R|).
    """
    N = np.asarray(N_values, dtype=float)
    u = np.log(N) / math.log(q)
    lnN = np.log(N)
    left = np.zeros(N.shape, dtype=complex)
    for m in bundle.members:
        left += np.exp(log_q(m.lam, q) * lnN) * u ** m.k * m(u)
    right = np.exp(log_q(bundle.lam, q) * lnN) * u ** combined.k * combined(u)
    return float(np.max(np.abs(left - right) / np.maximum(1.0, np.abs(right))))
