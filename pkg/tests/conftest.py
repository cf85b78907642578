import math

import numpy as np
import pytest

from regseq.esthetic import build_representation
from regseq.linrep import binary_sum_of_digits, constant_sequence


class TwoPoleEvaluator:
    """Integrand with simple poles at log_q lam + l pi i/log q for l in ``residues``.

    Mimics the evaluator interface used by the residue routines, with
    closed-form residues for cross-checks.
    """

    def __init__(self, lam=1.7, q=3, residues=None, delta=0.25, tolerance=1e-12):
        self.q = q
        self.log_q = math.log(q)
        self.R = 1.0
        self.log_R = 0.0
        self.delta = delta
        self.tolerance = tolerance
        self.lam = lam
        self.residues = residues or {-1: 0.3 - 0.2j, 0: 1.5, 1: 0.3 + 0.2j}
        self.poles = {l: math.log(lam) / self.log_q + 1j * math.pi * l / self.log_q
                      for l in self.residues}
        self.eigenvalues = np.array([lam, -lam], dtype=complex)

    def residue_integrand(self, s):
        s = np.asarray(s, dtype=complex)
        out = 1.0 / (s + 3.0)  # analytic part
        for l, r in self.residues.items():
            out = out + r / (s - self.poles[l])
        return out

    def pole_points(self, center, radius):
        return [p for p in self.poles.values() if abs(p - center) <= radius]


@pytest.fixture
def sumdigits():
    return binary_sum_of_digits()


@pytest.fixture
def constant():
    return constant_sequence(2)


@pytest.fixture
def esthetic4():
    return build_representation(4)


@pytest.fixture
def two_pole():
    return TwoPoleEvaluator()
