"""
Unit tests for the volume and dual volume variation checks
"""
import math

import numpy as np
import pytest

from modules.fixtures import BASE_TETRA, polyhedron_family
from modules.minkowski_core import MPoint
from modules.polyhedra import dual_volume, edge_data_derivative, hull
from modules.variation import (
    SmoothFamilySpec, algebraic_identity_residual, continuity_modulus, contains,
    dual_schlafli_check, epsilon_limit_check, monotonicity_check, nested_pair, normal_flow_integrand,
    schlafli_check, smooth_dual_variation_check, volume_derivative, w_schlafli_check,
)


class TestPolyhedralVariation:
    """Test suite for Schlafli-type checks along polyhedron families"""

    def test_rigid_family_is_stationary(self):
        """Test an isometric family has dVol* = 0 and a zero edge sum"""
        F = polyhedron_family("builtin:rigid-tetra-v1")
        report = dual_schlafli_check(F, 0.0, 1e-4)
        assert report.rhs == pytest.approx(0.0, abs=1e-8)
        assert report.lhs == pytest.approx(0.0, abs=1e-7)

    def test_dual_formula_on_stretch_family(self, stretch_family):
        """Test dVol* matches -1/2 sum theta dl for a stretching tetrahedron"""
        report = dual_schlafli_check(stretch_family, 0.05, 1e-4)
        assert report.residual <= 1e-6
        assert report.label == "dual Schlafli formula (polyhedral analog)"
        assert report.stencil == (1e-4, 2)

    @pytest.mark.parametrize("name", ["twist-tetra-v1", "breathing-tetra-v1", "bipyramid-v1"])
    def test_classical_formula(self, name):
        """Test dVol matches 1/2 sum l d_theta"""
        report = schlafli_check(polyhedron_family(f"builtin:{name}"), -0.05, 1e-4)
        assert report.residual <= 1e-6

    def test_w_volume_formula(self, stretch_family):
        """Test dW matches 1/4 sum (l d_theta - theta dl)"""
        assert w_schlafli_check(stretch_family, 0.0, 1e-4).residual <= 1e-6

    def test_quadratic_family_at_turning_point(self):
        """Test a family with vanishing edge velocities at t=0 has dVol* = 0"""
        F = polyhedron_family("builtin:quadratic-tetra-v1")
        report = dual_schlafli_check(F, 0.0, 1e-4)
        assert report.rhs == pytest.approx(0.0, abs=1e-8)
        assert report.lhs == pytest.approx(0.0, abs=1e-7)

    def test_volume_derivative_kinds_are_consistent(self, stretch_family):
        """Test dVol* = dVol - 1/2 d(sum l theta) through the finite differences"""
        h = 1e-4
        d_vol = volume_derivative(stretch_family, 0.02, h, "volume")
        d_dual = volume_derivative(stretch_family, 0.02, h, "dual")
        d_w = volume_derivative(stretch_family, 0.02, h, "w")
        assert d_w == pytest.approx(0.5 * (d_vol + d_dual), abs=1e-9)

    def test_algebraic_identity(self, stretch_family):
        """Test the edge-data identity between the two formulas holds to rounding"""
        assert algebraic_identity_residual(edge_data_derivative(stretch_family, 0.1, 1e-4)) <= 1e-14

    def test_stencil_outside_domain(self, stretch_family):
        """Test a check whose stencil leaves the domain is rejected"""
        with pytest.raises(ValueError):
            dual_schlafli_check(stretch_family, 0.2499, 1e-3)


class TestSmoothVariation:
    """Test suite for the smooth model families"""

    def test_sphere_derivative(self):
        """Test dVol*/dr = -4 pi cosh^2 r for geodesic spheres"""
        S = SmoothFamilySpec("geodesic_sphere", 0.5)
        report = smooth_dual_variation_check(S, 0.0)
        expected = -4.0 * math.pi * math.cosh(0.5) ** 2
        assert report.lhs == pytest.approx(expected, rel=1e-9)
        assert report.rhs == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("kind", ["plane_tube", "line_tube"])
    @pytest.mark.parametrize("radius", [0.1, 0.7, 1.5])
    def test_tube_families(self, kind, radius):
        """Test the smooth formula on tubes around planes and lines"""
        report = smooth_dual_variation_check(SmoothFamilySpec(kind, radius), 0.0)
        assert report.residual <= 1e-7

    def test_normal_flow_values(self):
        """Test <dI, H I - II> = -4 K_e for unit normal speed"""
        r = 0.8
        sphere = SmoothFamilySpec("geodesic_sphere", r)
        plane = SmoothFamilySpec("plane_tube", r)
        line = SmoothFamilySpec("line_tube", r)
        assert normal_flow_integrand(sphere, 0.0, (1.0, 0.3)) == pytest.approx(-4.0 / math.tanh(r) ** 2, rel=1e-12)
        assert normal_flow_integrand(plane, 0.0, (0.2, 0.1)) == pytest.approx(-4.0 * math.tanh(r) ** 2, rel=1e-12)
        assert normal_flow_integrand(line, 0.0, (0.5, 1.0)) == pytest.approx(-4.0, rel=1e-12)

    def test_first_form_derivative(self):
        """Test the closed-form dI = -2 f II against a finite difference"""
        S = SmoothFamilySpec("line_tube", 0.6, speed=0.5)
        assert S.delta_I_residual(0.0, (0.3, 1.2)) <= 1e-8

    def test_invalid_families(self):
        """Test unknown kinds and non-positive radii are rejected"""
        with pytest.raises(ValueError):
            SmoothFamilySpec("cylinder", 0.5)
        with pytest.raises(ValueError):
            SmoothFamilySpec("geodesic_sphere", 0.0)
        with pytest.raises(ValueError):
            SmoothFamilySpec("geodesic_sphere", 0.1).radius(-0.2)


class TestMonotonicity:
    """Test suite for dual volume monotonicity and continuity"""

    def test_self_inclusion_margin_is_zero(self, tetra):
        """Test P inside P gives a zero margin"""
        contained, margin = monotonicity_check(tetra, tetra)
        assert contained
        assert margin == pytest.approx(0.0, abs=1e-15)

    def test_scaled_copy_has_larger_dual_volume(self, tetra):
        """Test a shrunken copy has Vol* at least that of the original"""
        inner = hull([MPoint.from_klein(0.5 * y) for y in BASE_TETRA])
        contained, margin = monotonicity_check(inner, tetra)
        assert contained
        assert margin > 0

    def test_non_containment(self, tetra):
        """Test a pair that is not nested reports (False, None)"""
        inner = hull([MPoint.from_klein(0.5 * y) for y in BASE_TETRA])
        assert monotonicity_check(tetra, inner) == (False, None)

    def test_random_nested_pairs(self, rng):
        """Test random nested pairs satisfy the inequality"""
        for _ in range(5):
            inner, outer = nested_pair(rng)
            assert contains(outer, inner)
            assert dual_volume(inner) - dual_volume(outer) >= -1e-9

    def test_continuity_at_zero(self, tetra):
        """Test the modulus vanishes for a zero perturbation"""
        assert continuity_modulus(tetra, 0.0) == 0.0

    def test_continuity_shrinks_with_delta(self, tetra):
        """Test halving the perturbation size shrinks the sampled modulus"""
        coarse = continuity_modulus(tetra, 2e-3, seed=7)
        fine = continuity_modulus(tetra, 1e-3, seed=7)
        assert 0.0 < fine <= 0.75 * coarse

    def test_isometry_mode_is_flat(self, tetra):
        """Test Vol* does not move under small isometries"""
        assert continuity_modulus(tetra, 1e-2, mode="isometry") <= 1e-8

    def test_invalid_continuity_arguments(self, tetra):
        """Test negative sizes and unknown modes are rejected"""
        with pytest.raises(ValueError):
            continuity_modulus(tetra, -1e-3)
        with pytest.raises(ValueError):
            continuity_modulus(tetra, 1e-3, mode="shear")


class TestEpsilonLimit:
    """Test suite for the eps -> 0 limit of neighbourhood dual volumes"""

    def test_tetrahedron_limit(self, tetra):
        """Test the extrapolated limit recovers Vol*(P)"""
        report = epsilon_limit_check(tetra)
        assert report.residual <= 1e-7

    def test_bipyramid_limit(self, bipyramid):
        """Test the limit on a polyhedron with a degree-4 vertex"""
        report = epsilon_limit_check(bipyramid)
        assert report.rhs == pytest.approx(dual_volume(bipyramid), abs=1e-12)
        assert np.isfinite(report.lhs)
        assert report.residual <= 1e-7
