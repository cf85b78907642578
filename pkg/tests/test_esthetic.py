import itertools
import math

import numpy as np
import pytest

from regseq.errors import InvalidArgumentError
from regseq.esthetic import (asymptotic_analysis, build_representation, chebyshev_like,
                             count_by_length, dominant_indices, error_log_power,
                             esthetic_eigenvalues, is_esthetic)
from regseq.linrep import evaluate, summatory_fast, vector_table
from regseq.spectral import jsr_bounds, sum_matrix

Q4_MATRICES = [
    [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 0, 0], [1, 0, 0, 0, 0]],
    [[0, 1, 0, 0, 0], [0, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 0, 0, 0], [0, 1, 0, 0, 0]],
    [[0, 0, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 1, 0, 0]],
    [[0, 0, 0, 0, 0], [0, 0, 0, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 0], [0, 0, 0, 1, 0]],
]


def test_q4_matrices():
    rep = build_representation(4)
    for A, want in zip(rep.matrices, Q4_MATRICES):
        assert np.array_equal(A.real, want)
    assert np.array_equal(rep.left.real, [0, 0, 0, 0, 1])
    assert np.array_equal(rep.v0.real, [0, 1, 1, 1, 1])


def test_q2_matrices():
    rep = build_representation(2)
    assert rep.d == 3
    assert np.array_equal(rep.matrices[0][:, 0].real, [0, 1, 1])
    with pytest.raises(InvalidArgumentError):
        build_representation(1)


@pytest.mark.parametrize("q", range(2, 9))
def test_sum_matrix_block_form(q):
    C = sum_matrix(build_representation(q)).real
    assert not np.any(C[:, -1])
    assert np.array_equal(C[-1, :-1], np.ones(q))


def test_is_esthetic_examples():
    assert is_esthetic(27, 4)
    assert not is_esthetic(11, 2)
    assert is_esthetic(10, 10)
    assert not is_esthetic(0, 10) and is_esthetic(0, 10, count_zero=True)


def test_count_by_length_examples():
    assert count_by_length(10, 1) == 9
    assert count_by_length(10, 2) == 17
    assert count_by_length(2, 5) == 1


@pytest.mark.parametrize("q", [2, 3, 4, 5, 10])
def test_count_by_length_brute(q):
    for length in range(1, 6 if q < 10 else 5):
        brute = sum(1 for n in range(q ** (length - 1), q**length) if is_esthetic(n, q))
        assert count_by_length(q, length) == brute


@pytest.mark.parametrize("q", [2, 3, 4, 5, 10])
def test_automaton_matches_digit_check(q):
    rep = build_representation(q)
    vals = vector_table(rep, 10**5, exact=False).real @ rep.left.real
    assert vals[0] == 1
    check = np.array([is_esthetic(n, q) for n in range(1, 10**5)], dtype=float)
    assert np.array_equal(vals[1:], check)
    assert evaluate(rep, 0) == 1


def test_alternating_binary_members():
    members = [n for n in range(1, 128) if is_esthetic(n, 2)]
    assert members == [1, 2, 5, 10, 21, 42, 85]
    rep = build_representation(2)
    for j in range(1, 8):
        assert summatory_fast(rep, 2**j) == 1 + sum(1 for n in members if n < 2**j)


@pytest.mark.parametrize("q", range(2, 13))
def test_eigenvalues_are_chebyshev_roots(q):
    lams = esthetic_eigenvalues(q)
    assert len(lams) == q + 1 and lams[-1] == 0
    assert all(abs(chebyshev_like(q, x)) < 1e-9 for x in lams[:-1])


def test_eigenvalue_examples():
    assert np.allclose(sorted(esthetic_eigenvalues(2)), [-1, 0, 1])
    assert np.allclose(sorted(esthetic_eigenvalues(3)), [-2**0.5, 0, 0, 2**0.5])
    g = (1 + 5**0.5) / 2
    assert np.allclose(sorted(esthetic_eigenvalues(4)), [-g, -1 / g, 0, 1 / g, g])


@pytest.mark.parametrize("q", [2, 3, 4, 7])
def test_jsr_is_one(q):
    b = jsr_bounds(build_representation(q).matrices, 1)
    assert b.upper == 1.0
    assert jsr_bounds(build_representation(q).matrices, 4).lower == pytest.approx(1.0)


@pytest.mark.parametrize("q", range(3, 13))
def test_main_term_count(q):
    an = asymptotic_analysis(q, L=2)
    assert len(an.expansion.terms) == math.ceil((q - 2) / 3) == len(dominant_indices(q))
    assert an.error_log_power == (1 if q % 3 == 2 else 0)
    assert all(t.period == 2 and abs(t.lam) > 1 for t in an.expansion.terms)
    if q % 2 == 0:
        # +lambda_j carries no weight for even j, so there only odd indices survive
        for j, t in zip(dominant_indices(q), an.expansion.terms):
            vanishing = t.indices % 2 == (1 if j % 2 else 0)
            assert np.max(np.abs(t.coeffs[vanishing])) < 1e-6
        assert an.one_periodic_verified == all(j % 2 for j in dominant_indices(q))


def test_q4_exponent():
    an = asymptotic_analysis(4, L=2)
    (t,) = an.expansion.terms
    assert abs(math.log(t.lam.real, 4) - 0.3471) < 1e-4
    assert abs(math.log(t.lam.real, 4) - (math.log(5**0.5 + 1, 4) - 0.5)) < 1e-14


def test_q2_degenerate():
    an = asymptotic_analysis(2)
    assert an.expansion.terms == [] and an.log_growth


def test_error_log_power_examples():
    assert error_log_power(5) == 1 and error_log_power(8) == 1 and error_log_power(4) == 0
    assert [q for q in range(2, 15) if error_log_power(q)] == [2, 5, 8, 11, 14]


def test_count_by_length_matches_summatory():
    rep = build_representation(3)
    for length in range(1, 9):
        total = sum(count_by_length(3, l) for l in range(1, length + 1))
        assert summatory_fast(rep, 3**length) == 1 + total


def test_all_words_brute_q3():
    words = sum(1 for w in itertools.product(range(3), repeat=6)
                if w[0] != 0 and all(abs(a - b) == 1 for a, b in zip(w, w[1:])))
    assert count_by_length(3, 6) == words
