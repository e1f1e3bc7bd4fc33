"""
Unit tests for bent chains of half-spaces
"""
import math

import numpy as np
import pytest

from modules.bent_chain import (
    BentChain, ChainError, ChainSplit, body_distance, circle_point, circle_tangent_normal,
    distance_gradient, gradient_deviation, pencil_split, refine, refine_to_circle, window_forms,
)
from modules.fixtures import CHAIN_DIRECTIONS, CHAIN_RADIUS, circle_chain
from modules.minkowski_core import MPoint, mink


@pytest.fixture
def chain():
    return circle_chain()


class TestChains:
    """Test suite for chain construction and refinement"""

    def test_tangent_chain_angle(self, chain):
        """Test cos theta = cosh^2 r cos(gap) - sinh^2 r for two tangent planes of a circle"""
        r = CHAIN_RADIUS
        expected = math.acos(math.cosh(r) ** 2 * math.cos(0.6) - math.sinh(r) ** 2)
        assert chain.line_count == 1
        assert chain.angles[0] == pytest.approx(expected, abs=1e-12)

    def test_corners_lie_on_every_plane_pair(self, chain):
        """Test the corner of a bending line is on both planes and the base plane"""
        p = chain.corners[0]
        assert mink(p, p) == pytest.approx(-1.0, abs=1e-12)
        for n in (chain.normals[0], chain.normals[1], chain.base_normal):
            assert mink(p, n) == pytest.approx(0.0, abs=1e-12)

    def test_non_convex_chain_rejected(self):
        """Test out-of-order tangent planes are rejected"""
        with pytest.raises(ChainError):
            BentChain.tangent_to_circle(MPoint.origin(), CHAIN_RADIUS, (0.0, 0.6, 0.3))

    def test_single_plane_rejected(self):
        """Test a chain needs two half-spaces"""
        with pytest.raises(ChainError):
            BentChain((circle_tangent_normal(MPoint.origin(), 0.5, 0.0),))

    def test_pencil_split_telescopes(self, chain):
        """Test splitting through the bending line keeps the total bending"""
        refined = pencil_split(chain, 0, 3)
        assert refined.line_count == 3
        assert refined.angles == pytest.approx([chain.angles[0] / 3.0] * 3, abs=1e-12)
        assert refined.window_bending() == pytest.approx(chain.window_bending(), abs=1e-12)

    def test_null_split_leaves_chain_unchanged(self, chain):
        """Test a split that reproduces the next plane adds no line"""
        assert refine(chain, 0, ChainSplit(chain.angles[0], 0.0)) is chain

    def test_invalid_splits(self, chain):
        """Test negative angles, negative offsets and missing lines are rejected"""
        with pytest.raises(ChainError):
            refine(chain, 0, ChainSplit(-0.1))
        with pytest.raises(ChainError):
            refine(chain, 0, ChainSplit(0.1, -0.2))
        with pytest.raises(ChainError):
            refine(chain, 3, ChainSplit(0.1))

    def test_refine_to_circle_stays_tangent(self, chain):
        """Test inserted planes are the tangent planes at the mid directions"""
        refined, directions = refine_to_circle(chain, MPoint.origin(), CHAIN_RADIUS, list(CHAIN_DIRECTIONS))
        assert directions == pytest.approx([0.0, 0.3, 0.6])
        for n, phi in zip(refined.normals, directions):
            assert n == pytest.approx(circle_tangent_normal(MPoint.origin(), CHAIN_RADIUS, phi), abs=1e-10)


class TestWindow:
    """Test suite for the eps-surface over a chain window"""

    def test_window_surface_is_convex(self, chain):
        """Test every sampled point of the eps-surface is locally convex"""
        assert all(forms.is_convex(1e-7) for forms in window_forms(chain, 0.3))

    def test_face_areas(self, chain):
        """Test end patches use the end width and the strip has width 2 sinh(l/2)"""
        areas = chain.face_areas()
        assert len(areas) == 2
        assert areas[0] == pytest.approx(0.5 * 2.0 * math.sinh(0.5))


class TestDistance:
    """Test suite for distance fields of chain bodies"""

    def test_inside_point(self, chain):
        """Test points inside the body have negative distance and are their own nearest point"""
        x = MPoint.origin().x
        d, nearest = body_distance(chain, x)
        assert d < 0
        assert np.array_equal(nearest, x)

    def test_face_distance(self, chain):
        """Test a point on the normal geodesic through a tangency point is at distance s - r"""
        x = circle_point(MPoint.origin(), CHAIN_RADIUS + 0.4, 0.0)
        d, nearest = body_distance(chain, x)
        assert d == pytest.approx(0.4, abs=1e-12)
        assert nearest == pytest.approx(circle_point(MPoint.origin(), CHAIN_RADIUS, 0.0), abs=1e-12)

    def test_distance_gradient_is_unit(self, chain):
        """Test distance gradients are unit tangent vectors"""
        x = circle_point(MPoint.origin(), 0.9, 0.3)
        _, nearest = body_distance(chain, x)
        g = distance_gradient(x, nearest)
        assert mink(g, g) == pytest.approx(1.0, abs=1e-12)
        assert mink(g, x) == pytest.approx(0.0, abs=1e-12)

    def test_refinement_improves_gradients(self, chain):
        """Test distance gradients of refined chains approach those of the disc"""
        center = MPoint.origin()
        sites = [circle_point(center, CHAIN_RADIUS + 0.3, psi) for psi in np.linspace(0.05, 0.55, 11)]
        target = lambda x: distance_gradient(x, center.x)  # noqa: E731
        directions = list(CHAIN_DIRECTIONS)
        deviations = [gradient_deviation(chain, target, sites)]
        for _ in range(3):
            chain, directions = refine_to_circle(chain, center, CHAIN_RADIUS, directions)
            deviations.append(gradient_deviation(chain, target, sites))
        assert all(b <= a + 1e-12 for a, b in zip(deviations, deviations[1:]))
        assert deviations[-1] < deviations[0]
