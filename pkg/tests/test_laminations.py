"""
Unit tests for complex lengths, lamination lengths and their variations
"""
import cmath
import math

import numpy as np
import pytest

from modules.fixtures import (
    PATH_LAMINATIONS, bending_path, conformal_sine_deformation, lox_stretch_path, lox_twist_path,
    metric_deformation, static_deformation, warped_torus_deformation,
)
from modules.laminations import (
    BranchCrossingError, Curve, MetricDeformation, NonLoxodromicError, RationalLamination, Rep,
    RepPath, RepresentationError, complex_length, curve_length, first_variation_integral,
    is_cyclically_reduced, lamination_length, length_derivative, lipschitz_bound, real_length,
    word_length, word_matrix,
)


def _diag(lam: complex) -> np.ndarray:
    return np.diag([cmath.exp(0.5 * lam), cmath.exp(-0.5 * lam)])


@pytest.fixture
def rho():
    """Generic two-generator representation"""
    return bending_path().at(0.0)


class TestComplexLength:
    """Test suite for complex translation lengths"""

    def test_diagonal_length(self):
        """Test diag(e, 1/e) has length 2"""
        assert real_length(np.diag([math.e, 1.0 / math.e])) == pytest.approx(2.0, abs=1e-12)

    def test_complex_length_of_diagonal(self):
        """Test diag(e^(l/2), e^(-l/2)) recovers l = 1 + 0.5i"""
        assert complex_length(_diag(1.0 + 0.5j)) == pytest.approx(1.0 + 0.5j, abs=1e-12)

    def test_negative_trace_is_same_length(self):
        """Test -A has the same complex length modulo 2 pi i"""
        lam = complex_length(-_diag(1.0 + 0.5j))
        assert lam.real == pytest.approx(1.0, abs=1e-12)
        assert -math.pi < lam.imag <= math.pi

    def test_conjugation_invariance(self):
        """Test conjugate matrices share their complex length"""
        G = np.array([[2.0, 1.0 + 1.0j], [0.5, 0.75 + 0.25j]])
        G = G / np.sqrt(np.linalg.det(G))
        A = _diag(1.3 - 0.8j)
        assert complex_length(G @ A @ np.linalg.inv(G)) == pytest.approx(complex_length(A), abs=1e-10)

    @pytest.mark.parametrize("matrix", [
        np.eye(2),
        np.array([[1.0, 1.0], [0.0, 1.0]]),
        np.diag([cmath.exp(0.4j), cmath.exp(-0.4j)]),
    ])
    def test_non_loxodromic(self, matrix):
        """Test the identity, parabolic and elliptic elements are rejected"""
        with pytest.raises(NonLoxodromicError):
            complex_length(matrix)


class TestWords:
    """Test suite for words, representations and laminations"""

    def test_cyclic_permutation(self, rho):
        """Test cyclic permutations of a word have the same length"""
        assert word_length(rho, "abc") == pytest.approx(word_length(rho, "bca"), abs=1e-10)

    def test_inverse_word(self, rho):
        """Test a word and its inverse have the same length"""
        assert word_length(rho, "bC") == pytest.approx(word_length(rho, "cB"), abs=1e-10)

    def test_word_matrix_uses_inverses(self, rho):
        """Test aA evaluates to the identity"""
        assert np.allclose(word_matrix(rho, "aA"), np.eye(2), atol=1e-12)

    def test_cyclic_reduction(self):
        """Test reduced and non-reduced words are told apart"""
        assert is_cyclically_reduced("abc")
        assert is_cyclically_reduced("a")
        assert not is_cyclically_reduced("abA")
        assert not is_cyclically_reduced("aBb")

    def test_malformed_words(self, rho):
        """Test empty words, digits and missing generators are rejected"""
        for word in ("", "a1", "ad"):
            with pytest.raises(RepresentationError):
                word_matrix(rho, word)

    def test_bad_generators(self):
        """Test generators must be 2x2 with unit determinant"""
        with pytest.raises(RepresentationError):
            Rep((2.0 * np.eye(2),))
        with pytest.raises(RepresentationError):
            Rep((np.eye(3),))

    def test_lamination_validation(self):
        """Test non-positive weights and non-reduced words are rejected"""
        with pytest.raises(RepresentationError):
            RationalLamination((("a", 0.0),))
        with pytest.raises(RepresentationError):
            RationalLamination((("abA", 1.0),))

    def test_length_is_linear(self, rho):
        """Test lengths add over unions and scale with weights"""
        alpha = RationalLamination((("a", 0.7), ("bc", 1.0)))
        beta = RationalLamination((Curve("abc", 1.3),))
        total = lamination_length(rho, alpha.union(beta))
        assert total == pytest.approx(lamination_length(rho, alpha) + lamination_length(rho, beta), abs=1e-12)
        assert lamination_length(rho, alpha.scaled(2.5)) == pytest.approx(2.5 * lamination_length(rho, alpha))

    def test_lipschitz_bound(self, rho):
        """Test the length difference of two weightings is within the bound"""
        alpha = RationalLamination((("a", 0.7), ("bc", 1.0)))
        beta = RationalLamination((("a", 0.2), ("bc", 1.4)))
        difference = abs(lamination_length(rho, alpha) - lamination_length(rho, beta))
        assert difference <= lipschitz_bound(rho, alpha, beta) + 1e-12
        with pytest.raises(RepresentationError):
            lipschitz_bound(rho, alpha, RationalLamination((("abc", 1.0),)))

    def test_non_loxodromic_curve_is_named(self):
        """Test the failing curve index appears in the error"""
        rep = Rep((_diag(1.0), np.array([[1.0, 1.0], [0.0, 1.0]])))
        with pytest.raises(NonLoxodromicError, match="curve 1"):
            lamination_length(rep, RationalLamination((("a", 1.0), ("b", 1.0))))


class TestLengthVariation:
    """Test suite for derivatives of lamination length along representation paths"""

    def test_stretch_derivative(self):
        """Test d/dt of 2 (1 + t) is 2"""
        result = length_derivative(lox_stretch_path(), RationalLamination((("a", 1.0),)), 0.0, 1e-3)
        assert result.fd == pytest.approx(2.0, abs=1e-9)
        assert result.analytic == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("path", [lox_twist_path, bending_path])
    def test_analytic_matches_finite_difference(self, path):
        """Test the trace derivative agrees with the central difference"""
        P = path()
        alpha = RationalLamination(tuple(PATH_LAMINATIONS[P.name]))
        result = length_derivative(P, alpha, 0.1, 1e-3)
        assert result.residual <= 1e-5

    def test_branch_crossing(self):
        """Test a stencil across Im lambda = pi is rejected"""
        P = RepPath("wrap", lambda t: Rep((_diag(complex(1.0, math.pi + t)),)), (-0.5, 0.5))
        with pytest.raises(BranchCrossingError):
            length_derivative(P, RationalLamination((("a", 1.0),)), 0.0, 1e-3)

    def test_stencil_outside_domain(self):
        """Test stencils leaving the path domain are rejected"""
        with pytest.raises(ValueError):
            length_derivative(lox_stretch_path(), RationalLamination((("a", 1.0),)), 0.499, 1e-3)

    def test_non_smooth_path_rejected(self):
        """Test a path with a kink at t = 0 is not accepted"""
        with pytest.raises(RepresentationError):
            RepPath("kink", lambda t: Rep((_diag(1.0 + abs(t)),)), (-0.5, 0.5))


class TestMetricVariation:
    """Test suite for first variations of length under metric deformations"""

    def test_warped_torus(self):
        """Test stretching the core direction varies the core length by its length"""
        assert first_variation_integral(warped_torus_deformation()) == pytest.approx(1.3, abs=1e-10)

    def test_conformal_sine(self):
        """Test the conformal deformation gives 1 - cos 2"""
        D = conformal_sine_deformation()
        expected = 1.0 - math.cos(2.0)
        assert first_variation_integral(D) == pytest.approx(expected, abs=1e-10)
        h = 1e-4
        fd = (curve_length(D, h) - curve_length(D, -h)) / (2 * h)
        assert fd == pytest.approx(expected, abs=1e-7)

    def test_static_metric(self):
        """Test a constant metric has zero first variation"""
        D = static_deformation()
        assert first_variation_integral(D) == 0.0
        assert curve_length(D, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_non_geodesic_curve_rejected(self):
        """Test a curve of constant distance from the base geodesic is rejected"""
        with pytest.raises(ValueError):
            MetricDeformation(
                "equidistant",
                lambda x, t: np.diag([math.cosh(x[1]) ** 2, 1.0]),
                lambda x: np.zeros((2, 2)),
                lambda s: np.array([s, 0.3]),
                lambda s: np.array([1.0, 0.0]),
                lambda s: np.zeros(2),
                (0.0, 1.0),
            )

    def test_lookup_by_name(self):
        """Test built-in deformations resolve with and without the prefix"""
        assert metric_deformation("builtin:static-v1").name == "static-v1"
        with pytest.raises(KeyError):
            metric_deformation("missing-v1")
