import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regseq.errors import DomainError, InvalidArgumentError
from regseq.tauber import (PeriodicFunctionFamily, build_psi_by_integral, build_psi_from_fourier,
                           cauchy_radius, extract_psi_coefficients, fourier_gf_residual,
                           psi_by_integral_route, tauber_lhs, verify_tauber_relation)

EULER_GAMMA = 0.5772156649015329


def one(kappa=0, q=2, m=1):
    return PeriodicFunctionFamily.from_maps([{0: 1}] + [{0: 0}] * (m - 1), kappa, q)


def random_family(rng, m=None, L=None):
    m = m or int(rng.integers(1, 4))
    L = L if L is not None else int(rng.integers(0, 5))
    idx = np.arange(-L, L + 1)
    coeffs = rng.normal(size=(m, len(idx))) + 1j * rng.normal(size=(m, len(idx)))
    kappa = complex(rng.uniform(-1.5, 1), rng.uniform(-1, 1))
    q = float(rng.choice([2, 3, 4, 5, 10]))
    return PeriodicFunctionFamily(idx, coeffs / (1 + np.abs(idx)) ** 2, kappa, q)


def test_constant_closed_form():
    psi = build_psi_from_fourier(one())
    assert psi.coefficient(-1, 0) == 0 and abs(psi.coefficient(0, 0) - 1) < 1e-15
    assert not psi.flag_q_kappa_unit
    for Z in (0.05, 0.1j, -0.07 + 0.02j):
        assert abs(build_psi_by_integral(one(), 0.3, Z) - 1 / (1 + Z)) < 1e-13


def test_constant_cauchy_coefficients():
    u = np.linspace(0, 1, 7)
    assert np.allclose(extract_psi_coefficients(one(), 0, u), 1, atol=1e-12)
    assert np.allclose(extract_psi_coefficients(one(), 1, u), -1, atol=1e-12)
    assert np.allclose(extract_psi_coefficients(one(), -1, u), 0, atol=1e-12)


def test_harmonic_branch():
    fam = one(kappa=-1, q=3)
    psi = build_psi_from_fourier(fam)
    assert psi.flag_q_kappa_unit
    assert abs(psi.coefficient(-1, 0) - 1) < 1e-15 and psi.coefficient(0, 0) == 0


def test_zero_family():
    fam = PeriodicFunctionFamily([-1, 0, 2], np.zeros((2, 3)), 0.3, 2)
    psi = build_psi_from_fourier(fam)
    assert not np.any(psi.psi)
    assert build_psi_by_integral(fam, 0.4, 0.05) == 0
    assert np.all(extract_psi_coefficients(fam, 0, [0.1, 0.7]) == 0)


def test_single_mode_cross_route():
    fam = PeriodicFunctionFamily.from_maps([{1: 1}], 0, 2)
    psi = build_psi_from_fourier(fam)
    Z = 0.1
    a = 1 + 2j * math.pi / math.log(2)
    # Psi(0, Z) = psi_1(Z) from the series 1/(a + Z)
    assert abs(build_psi_by_integral(fam, 0.0, Z) - 1 / (a + Z)) < 1e-9
    assert abs(psi.coefficient(0, 1) - 1 / a) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_two_routes_agree(seed):
    fam = random_family(np.random.default_rng(seed))
    a = build_psi_from_fourier(fam)
    b = psi_by_integral_route(fam)
    assert np.max(np.abs(a.psi - b.psi)) < 1e-7


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_gf_identity(seed):
    rng = np.random.default_rng(seed)
    fam = random_family(rng)
    r = cauchy_radius(fam)
    Z = r * rng.uniform(0.1, 1.9) * np.exp(2j * np.pi * rng.uniform())
    assert fourier_gf_residual(fam, Z) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_psi_periodic_in_u(seed):
    rng = np.random.default_rng(seed)
    fam = random_family(rng)
    Z = cauchy_radius(fam) * np.exp(2j * np.pi * rng.uniform())
    a, b = build_psi_by_integral(fam, np.array([0.0, 1.0]), Z)
    assert abs(a - b) < 1e-9 * max(1, abs(a))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_psi_minus_one_vanishes(seed):
    fam = random_family(np.random.default_rng(seed))
    if abs(fam.q ** (fam.kappa + 1) - 1) <= 1e-6:
        return
    u = np.linspace(0, 1, 33)
    assert np.max(np.abs(extract_psi_coefficients(fam, -1, u))) < 1e-8
    assert not np.any(build_psi_from_fourier(fam).psi[0])


def test_domain_errors():
    fam = one()
    r = cauchy_radius(fam)
    with pytest.raises(DomainError):
        build_psi_by_integral(fam, 0.5, 0)
    with pytest.raises(DomainError):
        build_psi_by_integral(fam, 0.5, 2.5 * r)
    with pytest.raises(DomainError):
        build_psi_by_integral(fam, 1.5, r)
    with pytest.raises(InvalidArgumentError):
        PeriodicFunctionFamily([0], [[1]], 0, 2, alpha=0.5, beta=0.7)
    with pytest.raises(InvalidArgumentError):
        PeriodicFunctionFamily([0, 0], [[1, 1]], 0, 2)


def test_lhs_matches_brute():
    fam = PeriodicFunctionFamily.from_maps([{-1: 0.5, 1: 0.5}, {0: 1}], 0.2, 3)
    N = np.array([2, 17, 1000, 5000])
    got = tauber_lhs(fam, N, chunk=999)
    for Nv, g in zip(N, got):
        n = np.arange(1, Nv, dtype=float)
        u = np.log(n) / math.log(3)
        want = np.sum(n**0.2 * (np.log(n) * fam.phi(0, u) + fam.phi(1, u)))
        assert abs(g - want) < 1e-9 * abs(want)


def test_verify_constant():
    rep = verify_tauber_relation(one(), Nmax=10**5)
    assert rep.fitted_c == -1
    assert rep.max_residual == 0


def test_verify_harmonic():
    rep = verify_tauber_relation(one(kappa=-1), Nmax=10**6)
    assert abs(rep.fitted_c - EULER_GAMMA) < 1e-3


def test_verify_two_functions():
    fam = PeriodicFunctionFamily.from_maps([{-1: 0.5, 1: 0.5}, {0: 1}], 0, 2)
    rep = verify_tauber_relation(fam, Nmax=10**6)
    assert rep.max_residual < 1.0
    assert rep.decay_exponent <= -(fam.alpha - fam.beta) + 0.1


def test_verify_rejects_small_Nmax():
    with pytest.raises(InvalidArgumentError):
        verify_tauber_relation(one(), Nmax=100)
