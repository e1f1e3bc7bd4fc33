"""
Test configuration and fixtures for schlafli-lab tests
"""
import json

import numpy as np
import pytest

from models.validation import SuiteConfigModel
from modules.fixtures import base_bipyramid, base_tetrahedron, polyhedron_family
from modules.minkowski_core import MPoint


@pytest.fixture
def tetra():
    """Built-in base tetrahedron"""
    return base_tetrahedron()


@pytest.fixture
def bipyramid():
    return base_bipyramid()


@pytest.fixture
def stretch_family():
    return polyhedron_family("builtin:stretch-tetra-v1")


@pytest.fixture
def rng():
    """Seeded generator so randomized tests are reproducible"""
    return np.random.default_rng(12345)


@pytest.fixture
def random_points(rng):
    """Eight random points of H^3 inside the Klein ball of radius 0.8"""
    directions = rng.normal(size=(8, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    klein = directions * 0.8 * rng.uniform(size=(8, 1))
    return [MPoint.from_klein(y) for y in klein]


@pytest.fixture
def fast_config():
    """Small suite configuration that keeps harness tests quick"""
    return SuiteConfigModel(
        t_grid=[0.0],
        eps_grid=[0.25],
        margin_times=[-0.01, 0.01],
        monotonic_pairs=3,
        smooth_radii=[0.5],
        families=["builtin:stretch-tetra-v1"],
    )


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document under tmp_path and return its path as a string"""
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return str(path)
    return _write
