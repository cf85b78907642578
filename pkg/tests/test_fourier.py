import math

import numpy as np
import pytest

from regseq.dirichlet import DirichletEvaluator
from regseq.errors import GeometryError, InvalidArgumentError
from regseq.esthetic import build_representation
from regseq.fourier import (FluctuationSeries, build_expansion, default_rho, empirical_fluctuation,
                            evaluate_expansion, fluctuation_series, fourier_coefficient, log_q,
                            make_executor, residue_coefficients)
from regseq.linrep import binary_sum_of_digits, constant_sequence, summatory_brute, summatory_fast
from regseq.spectral import eigen_data, sum_matrix


@pytest.fixture(scope="module")
def const_ev():
    return DirichletEvaluator(constant_sequence(3))


@pytest.fixture(scope="module")
def sod_ev():
    return DirichletEvaluator(binary_sum_of_digits())


@pytest.fixture(scope="module")
def est_ev():
    return DirichletEvaluator(build_representation(4), R=1 + 1e-6)


def test_constant_coefficients(const_ev):
    assert abs(fourier_coefficient(const_ev, 3, 0, 0) - 1) < 1e-9
    for ell in (-3, -1, 1, 2, 7):
        assert abs(fourier_coefficient(const_ev, 3, 0, ell)) < 1e-8


def test_sum_of_digits_log_coefficient(sod_ev):
    assert abs(fourier_coefficient(sod_ev, 2, 1, 0) - 0.5) < 1e-6


def test_sum_of_digits_log_coefficient_from_brute_force():
    # X(2^j) = j 2^(j-1) exactly, so the N log_2 N coefficient is 1/2
    js = np.arange(4, 17)
    X = np.array([summatory_brute(binary_sum_of_digits(), 2**int(j)) for j in js], dtype=float)
    slope = np.polyfit(js, X / 2.0**js, 1)[0]
    assert abs(slope - 0.5) < 1e-12


def test_sum_of_digits_mean_closed_form(sod_ev):
    mean = math.log2(math.pi) / 2 - 1 / (2 * math.log(2)) - 0.25
    assert abs(fourier_coefficient(sod_ev, 2, 0, 0) - mean) < 1e-9


def test_higher_coefficients_match_zeta_formula(sod_ev):
    # closed form: phi_l = -zeta(chi_l) / (log 2 * chi_l (1 + chi_l)) for l != 0
    mpmath = pytest.importorskip("mpmath")
    for ell in (1, 2, -3):
        chi = 2j * math.pi * ell / math.log(2)
        want = -complex(mpmath.zeta(chi)) / (math.log(2) * chi * (1 + chi))
        assert abs(fourier_coefficient(sod_ev, 2, 0, ell) - want) < 1e-9


@pytest.mark.parametrize("ell", [0, 1, -2, 5])
def test_rho_independence(sod_ev, ell):
    s0 = 1 + 2j * math.pi * ell / math.log(2)
    rho = default_rho(sod_ev, s0)
    for k in (0, 1):
        a = fourier_coefficient(sod_ev, 2, k, ell, rho=rho)
        b = fourier_coefficient(sod_ev, 2, k, ell, rho=rho / 2)
        assert abs(a - b) <= 10 * sod_ev.tolerance


def test_conjugate_symmetry(sod_ev, est_ev):
    idx = np.arange(-6, 7)
    for ev, lam in ((sod_ev, 2), (est_ev, (1 + 5**0.5) / 2), (est_ev, -(1 + 5**0.5) / 2)):
        c = residue_coefficients(ev, lam, idx, (0,))[0]
        conj_lam = residue_coefficients(ev, np.conj(lam), -idx, (0,))[0]
        assert np.max(np.abs(c - np.conj(conj_lam))) < 1e-8


def test_geometry_errors(sod_ev, est_ev):
    with pytest.raises(GeometryError):
        fourier_coefficient(sod_ev, 2, 0, 0, rho=2.0)
    with pytest.raises(GeometryError):
        fourier_coefficient(sod_ev, 2, 0, 1, rho=5.0)
    with pytest.raises(GeometryError):
        # 0.618 lies inside |lambda| <= R q^delta: the pole is outside the strip
        fourier_coefficient(est_ev, (5**0.5 - 1) / 2, 0, 0)


def test_series_periodicity():
    rng = np.random.default_rng(3)
    idx = np.arange(-5, 6)
    for p in (1, 2, 3):
        s = FluctuationSeries(1.5, 0, p, idx, rng.normal(size=11) + 1j * rng.normal(size=11))
        u = rng.integers(-4096, 4096, 50) / 1024
        assert np.array_equal(s(u), s(u + p))
    with pytest.raises(InvalidArgumentError):
        FluctuationSeries(1.0, 0, 1, [0, 1], [1.0])


def test_series_real_for_real_sequence(sod_ev):
    (s0, s1) = fluctuation_series(sod_ev, 2, (0, 1), 20)
    u = np.linspace(0, 1, 101)
    for s in (s0, s1):
        v = s(u)
        assert np.all(np.abs(v.imag) < 1e-8 * (1 + np.abs(v)))


def test_build_expansion_constant(const_ev):
    exp = build_expansion(const_ev, eigen_data(const_ev.C), L=5)
    assert len(exp.terms) == 1
    t = exp.terms[0]
    assert t.lam == 3 and t.k == 0 and t.period == 1
    assert np.allclose(t(np.linspace(0, 1, 9)), 1, atol=1e-8)
    assert abs(evaluate_expansion(exp, 1000) - 1000) < 1e-5


def test_build_expansion_sum_of_digits(sod_ev):
    exp = build_expansion(sod_ev, eigen_data(sod_ev.C), L=3, R=1 + 1e-6)
    assert [(t.lam, t.k) for t in exp.terms] == [(2, 0), (2, 1)]
    assert exp.error_log_power == 0


def test_build_expansion_esthetic(est_ev):
    exp = build_expansion(est_ev, eigen_data(est_ev.C), L=4)
    lams = sorted(complex(t.lam).real for t in exp.terms)
    phi = (1 + 5**0.5) / 2
    assert np.allclose(lams, [-phi, phi], atol=1e-12)
    assert all(t.k == 0 for t in exp.terms)
    assert exp.error_log_power == 0
    assert abs(exp.error_exponent - math.log(1 + 1e-6, 4)) < 1e-12


def test_sum_of_digits_expansion_relative_gap(sod_ev):
    exp = build_expansion(sod_ev, eigen_data(sod_ev.C), L=50, R=1 + 1e-6)
    N = 2**20
    X = summatory_brute(binary_sum_of_digits(), N)
    assert abs(evaluate_expansion(exp, N).real - X) / X < 1e-3


def test_esthetic_expansion_4_12(est_ev):
    exp = build_expansion(est_ev, eigen_data(est_ev.C), L=50, executor=make_executor())
    N = 4**12
    X = summatory_fast(build_representation(4), N)
    assert abs(evaluate_expansion(exp, N).real - X) / X < 0.05


def test_evaluate_expansion_rejects_small_N(const_ev):
    exp = build_expansion(const_ev, eigen_data(const_ev.C), L=1)
    with pytest.raises(InvalidArgumentError):
        evaluate_expansion(exp, 1)


def test_empirical_constant(const_ev):
    exp = build_expansion(const_ev, eigen_data(const_ev.C), L=2)
    emp, _ = empirical_fluctuation(constant_sequence(3), exp, 0, np.arange(1, 8, 1.0))
    assert np.allclose(emp, 1)


def test_empirical_sum_of_digits_periodic(sod_ev):
    exp = build_expansion(sod_ev, eigen_data(sod_ev.C), L=30, R=1 + 1e-6)
    u = np.linspace(15, 16, 41)
    a, rec = empirical_fluctuation(binary_sum_of_digits(), exp, 0, u)
    b, _ = empirical_fluctuation(binary_sum_of_digits(), exp, 0, u + 1)
    assert np.max(np.abs(a - b)) < 1e-3
    assert np.all(np.abs(a) < 0.5)
    assert np.max(np.abs(a - rec)) < 0.05


def test_log_q():
    assert abs(log_q(-4, 2) - (2 + 1j * math.pi / math.log(2))) < 1e-15


@pytest.mark.parametrize("name", ["constant", "sum-of-digits", "esthetic4"])
def test_reconstruction_growth(name):
    """log-log slope of |X(N) - expansion(N)| stays below log_q R + 0.05."""
    rep = {"constant": constant_sequence(2), "sum-of-digits": binary_sum_of_digits(),
           "esthetic4": build_representation(4)}[name]
    ev = DirichletEvaluator(rep, R=1 + 1e-6 if name == "esthetic4" else None)
    exp = build_expansion(ev, eigen_data(sum_matrix(rep)), L=50, executor=make_executor())
    rng = np.random.default_rng(7)
    N = np.unique(np.round(np.exp(rng.uniform(math.log(1e3), math.log(1e7), 20)))).astype(int)
    gap = np.array([abs(summatory_fast(rep, int(n)) - evaluate_expansion(exp, int(n))) for n in N])
    if np.all(gap < 1e-6 * N):
        return  # exact up to round-off
    slope = np.polyfit(np.log(N), np.log(np.maximum(gap, 1e-300)), 1)[0]
    assert slope <= exp.error_exponent + 0.05
