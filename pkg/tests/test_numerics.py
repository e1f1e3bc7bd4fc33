"""
Unit tests for finite-difference stencils and quadrature rules
"""
import math

import numpy as np
import pytest

from modules.finite_difference import Stencil, central_difference, partial_derivatives, richardson_limit
from modules.quadrature import (
    QuadratureError, gauss_legendre, grundmann_moeller_rule, integrate_tetrahedra,
    integrate_with_pattern, tensor_gauss_legendre, tetra_volumes,
)

UNIT_TETRA = np.array([[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]])


class TestFiniteDifference:
    """Test suite for central stencils and Richardson extrapolation"""

    def test_second_order_exact_on_quadratics(self):
        """Test the order-2 stencil differentiates quadratics exactly"""
        assert central_difference(lambda t: 3 * t * t - t, 0.7, 0.1) == pytest.approx(3.2, abs=1e-12)

    def test_fourth_order_beats_second_order(self):
        """Test the order-4 stencil is more accurate on exp"""
        exact = math.exp(0.3)
        low = abs(central_difference(math.exp, 0.3, 1e-2, order=2) - exact)
        high = abs(central_difference(math.exp, 0.3, 1e-2, order=4) - exact)
        assert high < low * 1e-3

    def test_error_scales_quadratically(self):
        """Test halving h shrinks the order-2 error about four times"""
        exact = math.cos(1.0)
        coarse = abs(central_difference(math.sin, 1.0, 1e-2) - exact)
        fine = abs(central_difference(math.sin, 1.0, 5e-3) - exact)
        assert coarse / fine == pytest.approx(4.0, rel=1e-3)

    def test_vector_valued(self):
        """Test array-valued functions are differentiated componentwise"""
        d = central_difference(lambda t: np.array([t ** 2, math.sin(t)]), 0.5, 1e-3, order=4)
        assert d == pytest.approx([1.0, math.cos(0.5)], abs=1e-10)

    def test_invalid_stencil(self):
        """Test non-positive steps and unknown orders are rejected"""
        with pytest.raises(ValueError):
            Stencil(0.0)
        with pytest.raises(ValueError):
            Stencil(1e-3, order=3)

    def test_partial_derivatives_of_polynomial_chart(self):
        """Test chart partials on a cubic map"""
        chart = lambda u, v: np.array([u * u * v, u + v ** 3])  # noqa: E731
        c, c_u, c_v, c_uu, c_uv, c_vv = partial_derivatives(chart, 0.4, -0.3, 1e-3)
        assert c_u == pytest.approx([2 * 0.4 * -0.3, 1.0], abs=1e-9)
        assert c_v == pytest.approx([0.16, 3 * 0.09], abs=1e-9)
        assert c_uu == pytest.approx([-0.6, 0.0], abs=1e-6)
        assert c_uv == pytest.approx([0.8, 0.0], abs=1e-6)
        assert c_vv == pytest.approx([0.0, -1.8], abs=1e-6)

    def test_richardson_removes_polynomial_error(self):
        """Test extrapolation recovers the limit of L + a h + b h^2 + c h^3"""
        steps = [0.02, 0.01, 0.005, 0.0025]
        values = [1.5 + 0.3 * h - 2.0 * h * h + 7.0 * h ** 3 for h in steps]
        assert richardson_limit(steps, values, [1, 2, 3]) == pytest.approx(1.5, abs=1e-12)

    def test_richardson_needs_constant_ratio(self):
        """Test uneven step ratios are rejected"""
        with pytest.raises(ValueError):
            richardson_limit([0.1, 0.05, 0.02], [1.0, 1.0, 1.0], [1])


class TestQuadrature:
    """Test suite for simplex and tensor quadrature"""

    @pytest.mark.parametrize("s", [1, 2, 4, 5])
    def test_grundmann_moeller_weights_sum_to_one(self, s):
        """Test rule weights are normalized"""
        _, weights = grundmann_moeller_rule(s)
        assert weights.sum() == pytest.approx(1.0, abs=1e-13)

    def test_grundmann_moeller_polynomial_exactness(self):
        """Test the degree-11 rule integrates x^4 y^3 z^2 exactly on the unit tetrahedron"""
        nodes, weights = grundmann_moeller_rule(5)
        points = nodes @ np.vstack([np.zeros(3), np.eye(3)])
        values = points[:, 0] ** 4 * points[:, 1] ** 3 * points[:, 2] ** 2
        exact = math.factorial(4) * math.factorial(3) * math.factorial(2) / math.factorial(12)
        assert (values @ weights) / 6.0 == pytest.approx(exact, rel=1e-12)

    def test_adaptive_integral_of_smooth_function(self):
        """Test adaptive integration of exp(x + y + z) over the unit tetrahedron"""
        value, pattern = integrate_tetrahedra(lambda p: np.exp(p.sum(axis=-1)), UNIT_TETRA, 1e-12)
        exact = math.e / 2.0 - 1.0
        assert value == pytest.approx(exact, abs=1e-11)
        assert len(pattern) >= 1

    def test_pattern_reuse_matches_adaptive_value(self):
        """Test reusing the pattern on the same tetrahedra reproduces the value"""
        func = lambda p: 1.0 / (1.5 - p[..., 0]) ** 2  # noqa: E731
        value, pattern = integrate_tetrahedra(func, UNIT_TETRA, 1e-11)
        assert integrate_with_pattern(func, UNIT_TETRA, pattern) == pytest.approx(value, abs=1e-15)

    def test_budget_exhaustion(self):
        """Test a singular integrand with a tiny budget raises QuadratureError"""
        func = lambda p: 1.0 / np.sqrt(np.maximum(p.sum(axis=-1), 1e-300))  # noqa: E731
        with pytest.raises(QuadratureError):
            integrate_tetrahedra(func, UNIT_TETRA, 1e-14, max_cells=50)

    def test_degenerate_domain(self):
        """Test flat tetrahedra are rejected"""
        flat = np.array([[[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]], dtype=float)
        with pytest.raises(QuadratureError):
            integrate_tetrahedra(lambda p: np.ones(p.shape[:-1]), flat, 1e-10)

    def test_tetra_volumes(self):
        """Test Euclidean tetrahedron volumes"""
        assert tetra_volumes(UNIT_TETRA)[0] == pytest.approx(1.0 / 6.0)

    def test_gauss_legendre_interval(self):
        """Test the 6-point rule integrates x^11 on [0, 2] exactly"""
        x, w = gauss_legendre(0.0, 2.0, 6)
        assert w @ x ** 11 == pytest.approx(2.0 ** 12 / 12.0, rel=1e-13)

    def test_tensor_rule_on_box(self):
        """Test the tensor rule integrates cos(u) v^2 on a box"""
        nodes, weights = tensor_gauss_legendre([(0.0, 1.0), (-1.0, 2.0)], 10)
        value = weights @ (np.cos(nodes[:, 0]) * nodes[:, 1] ** 2)
        assert value == pytest.approx(math.sin(1.0) * 3.0, abs=1e-13)
