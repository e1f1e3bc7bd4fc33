"""
Unit tests for versioned built-in fixtures
"""
import pytest

from modules.fixtures import (
    DIFFEO_FAMILIES, METRIC_DEFORMATIONS, POLYHEDRON_FAMILIES, REP_PATHS, diffeo_family,
    lox_stretch_path, polyhedron_family, polyhedron_family_params, rep_path, strip_prefix,
)


class TestFixtures:
    """Test suite for fixture lookup"""

    @pytest.mark.parametrize("name", sorted(POLYHEDRON_FAMILIES))
    def test_polyhedron_families_build(self, name):
        """Test every built-in family keeps its face lattice on its domain"""
        F = polyhedron_family(f"builtin:{name}")
        assert F.polyhedron(0.2).combinatorics == F.combinatorics

    def test_families_are_cached(self):
        """Test prefixed and cached lookups return the same family"""
        assert polyhedron_family("builtin:twist-tetra-v1") is polyhedron_family("builtin:twist-tetra-v1")

    def test_family_params(self):
        """Test generator parameters are listed, applied and validated"""
        assert polyhedron_family_params("builtin:rigid-tetra-v1") == ("boost", "turn")
        assert polyhedron_family_params("bipyramid-v1") == ()
        F = polyhedron_family("builtin:breathing-tetra-v1", rate=0.0)
        assert F.name == "breathing-tetra-v1[rate=0]"
        assert F.vertex_array(0.2) == pytest.approx(F.vertex_array(0.0), abs=0.0)
        with pytest.raises(ValueError, match="does not accept"):
            polyhedron_family("builtin:breathing-tetra-v1", speed=1.0)

    @pytest.mark.parametrize("lookup", [polyhedron_family, rep_path, diffeo_family])
    def test_unknown_names(self, lookup):
        """Test unknown names raise KeyError"""
        with pytest.raises(KeyError):
            lookup("builtin:missing-v1")

    def test_versioned_names(self):
        """Test every fixture name carries a version suffix"""
        for names in (POLYHEDRON_FAMILIES, REP_PATHS, DIFFEO_FAMILIES, METRIC_DEFORMATIONS):
            assert all(name.rsplit("-", 1)[-1].startswith("v") for name in names)

    def test_strip_prefix(self):
        """Test the builtin: prefix is optional"""
        assert strip_prefix("builtin:bipyramid-v1") == "bipyramid-v1"
        assert strip_prefix("bipyramid-v1") == "bipyramid-v1"

    def test_rep_path_params(self):
        """Test path parameters reach the path constructor"""
        P = rep_path("builtin:lox-stretch-v1", base=0.5, rate=2.0)
        assert P.name == lox_stretch_path().name
        rho = P.at(0.25)
        assert abs(rho.generators[0][0, 0]) == pytest.approx(2.718281828459045, rel=1e-12)
