"""
Versioned built-in fixtures

Every fixture is frozen under its name; a changed fixture gets a new -vN suffix
so that stored reports stay comparable. Families are built lazily and cached.
"""
import inspect
import logging
import math
from functools import lru_cache, partial
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from modules.bent_chain import BentChain
from modules.laminations import MetricDeformation, Rep, RepPath
from modules.minkowski_core import (
    HPlane, Isometry, MPoint, TangentVec, klein_to_minkowski, mink, project_to_sheet,
)
from modules.polyhedra import ConvexPolyhedron, PolyhedronFamily, hull
from modules.tubes import DiffeoFamily, DiffeomorphismError, PlaneFrame

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"

BASE_TETRA = np.array([
    [0.35, 0.0, -0.15],
    [-0.2, 0.3, -0.15],
    [-0.2, -0.3, -0.12],
    [0.02, 0.01, 0.4],
])
BIPYRAMID = np.array([
    [0.4, 0.0, 0.0],
    [-0.2, 0.35, 0.0],
    [-0.2, -0.35, 0.0],
    [0.02, 0.03, 0.45],
    [-0.03, 0.01, -0.4],
])
# Fixed directions for the quadratic family, one per vertex
QUADRATIC_DIRECTIONS = np.array([
    [0.0, 0.3, -0.2, 0.1],
    [0.0, -0.1, 0.25, 0.2],
    [0.0, 0.2, 0.1, -0.3],
    [0.0, -0.25, -0.15, 0.3],
])
FAMILY_DOMAIN = (-0.25, 0.25)


def strip_prefix(name: str) -> str:
    return name[len(BUILTIN_PREFIX):] if name.startswith(BUILTIN_PREFIX) else name


def _lift(klein: np.ndarray) -> np.ndarray:
    return np.array([klein_to_minkowski(y) for y in klein])


def base_tetrahedron() -> ConvexPolyhedron:
    return hull([MPoint.from_klein(y) for y in BASE_TETRA])


def base_bipyramid() -> ConvexPolyhedron:
    return hull([MPoint.from_klein(y) for y in BIPYRAMID])


# Polyhedron families


def _rigid(t: float, anchor: Optional[float] = None, boost: float = 0.5, turn: float = 0.9) -> np.ndarray:
    L = Isometry.boost(1, boost * t).compose(Isometry.rotation(2, 3, turn * t))
    return _lift(BASE_TETRA) @ L.L.T


def _stretch(t: float, anchor: Optional[float] = None, speed: float = 1.0) -> np.ndarray:
    points = _lift(BASE_TETRA)
    apex = MPoint(points[3])
    centroid = project_to_sheet(points.sum(axis=0))
    away = TangentVec.project(apex, -centroid).normalized().v
    points[3] = project_to_sheet(math.cosh(speed * t) * apex.x + math.sinh(speed * t) * away)
    return points


def _breathing(t: float, anchor: Optional[float] = None, rate: float = 0.5) -> np.ndarray:
    return _lift((1.0 + rate * t) * BASE_TETRA)


def _twist(t: float, anchor: Optional[float] = None, rate: float = 0.8) -> np.ndarray:
    points = _lift(BASE_TETRA)
    R = Isometry.rotation(2, 3, rate * t).L
    points[2:] = points[2:] @ R.T
    return points


def _quadratic(t: float, anchor: Optional[float] = None, scale: float = 1.0) -> np.ndarray:
    points = _lift(BASE_TETRA) + scale * t * t * QUADRATIC_DIRECTIONS
    return np.array([project_to_sheet(x) for x in points])


def _bipyramid(t: float, anchor: Optional[float] = None) -> np.ndarray:
    klein = BIPYRAMID.copy()
    klein[3] = klein[3] + t * np.array([0.1, -0.05, 0.2])
    return _lift(klein)


POLYHEDRON_FAMILIES: Dict[str, Callable] = {
    "rigid-tetra-v1": _rigid,
    "stretch-tetra-v1": _stretch,
    "breathing-tetra-v1": _breathing,
    "twist-tetra-v1": _twist,
    "quadratic-tetra-v1": _quadratic,
    "bipyramid-v1": _bipyramid,
}


def polyhedron_family_params(name: str) -> Tuple[str, ...]:
    """Keyword parameters accepted by a built-in polyhedron family"""
    key = strip_prefix(name)
    if key not in POLYHEDRON_FAMILIES:
        raise KeyError(f"unknown polyhedron family {name!r}")
    signature = inspect.signature(POLYHEDRON_FAMILIES[key])
    return tuple(p for p in signature.parameters if p not in ("t", "anchor"))


@lru_cache(maxsize=None)
def polyhedron_family(name: str, **params: float) -> PolyhedronFamily:
    """
    Built-in family, optionally with its generator parameters overridden

    Raises:
        KeyError: unknown family name
        ValueError: a parameter the family does not accept
    """
    key = strip_prefix(name)
    unknown = sorted(set(params) - set(polyhedron_family_params(key)))
    if unknown:
        raise ValueError(f"{key} does not accept parameters {unknown}")
    if not params:
        return PolyhedronFamily(key, POLYHEDRON_FAMILIES[key], FAMILY_DOMAIN)
    label = ",".join(f"{k}={v:g}" for k, v in sorted(params.items()))
    return PolyhedronFamily(f"{key}[{label}]", partial(POLYHEDRON_FAMILIES[key], **params), FAMILY_DOMAIN)


# Representation paths


def _conjugate(G: np.ndarray, D: np.ndarray) -> np.ndarray:
    return G @ D @ np.linalg.inv(G)


def _diagonal(lam: complex) -> np.ndarray:
    return np.diag([np.exp(0.5 * lam), np.exp(-0.5 * lam)])


def lox_stretch_path(base: float = 1.0, rate: float = 1.0) -> RepPath:
    """One generator diag(e^(base + rate t), inverse), real length 2 (base + rate t)"""
    return RepPath(
        "lox-stretch-v1",
        lambda t: Rep((np.diag([np.exp(base + rate * t), np.exp(-(base + rate * t))]).astype(complex),)),
        (-0.5, 0.5),
    )


def lox_twist_path() -> RepPath:
    G = np.array([[1.0, 0.3 + 0.2j], [0.1 - 0.4j, 1.0 + (0.3 + 0.2j) * (0.1 - 0.4j)]])

    def fn(t):
        lam = complex(1.0 + 0.3 * t, 0.5 + 0.7 * t)
        return Rep((_conjugate(G, _diagonal(lam)),))

    return RepPath("lox-twist-v1", fn, (-0.5, 0.5))


def bending_path() -> RepPath:
    """Three loxodromics with the third rotated about the common axis of a and of K"""
    a = _diagonal(complex(0.9, 0.2))
    b = _conjugate(np.array([[1.0, 1.0], [0.5, 1.5]], dtype=complex), _diagonal(complex(1.1, 0.3)))
    c0 = _conjugate(np.array([[1.0, -0.5], [0.8, 0.6]], dtype=complex), _diagonal(complex(0.7, 0.1)))

    def fn(t):
        K = np.diag([np.exp(0.5j * t), np.exp(-0.5j * t)])
        return Rep((a, b, _conjugate(K, c0)))

    return RepPath("bending-v1", fn, (-0.5, 0.5))


REP_PATHS: Dict[str, Callable[..., RepPath]] = {
    "lox-stretch-v1": lox_stretch_path,
    "lox-twist-v1": lox_twist_path,
    "bending-v1": bending_path,
}

# Default laminations used with each path by the lengths suite
PATH_LAMINATIONS = {
    "lox-stretch-v1": [("a", 1.0)],
    "lox-twist-v1": [("a", 1.5), ("aa", 0.5)],
    "bending-v1": [("a", 0.7), ("bc", 1.0), ("bC", 0.4), ("abc", 1.3)],
}


def rep_path(name: str, **params) -> RepPath:
    key = strip_prefix(name)
    if key not in REP_PATHS:
        raise KeyError(f"unknown representation path {name!r}")
    return REP_PATHS[key](**params)


# Deformations of H^3 for the convexity margin


def _identity_map(t: float, x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _isometry_map(t: float, x: np.ndarray) -> np.ndarray:
    return Isometry.boost(1, 0.7 * t).L @ Isometry.rotation(2, 3, 1.3 * t).L @ x


def _klein_dilation(t: float, x: np.ndarray) -> np.ndarray:
    y = (1.0 + t) * np.asarray(x[1:]) / x[0]
    if float(y @ y) >= 1.0:
        raise DiffeomorphismError(f"Klein dilation by {1.0 + t} leaves the ball")
    return klein_to_minkowski(y)


DIFFEO_FAMILIES = {
    "identity-v1": _identity_map,
    "isometry-v1": _isometry_map,
    "klein-dilation-v1": _klein_dilation,
}


def diffeo_family(name: str) -> DiffeoFamily:
    key = strip_prefix(name)
    if key not in DIFFEO_FAMILIES:
        raise KeyError(f"unknown deformation family {name!r}")
    return DiffeoFamily(key, DIFFEO_FAMILIES[key])


def margin_plane() -> PlaneFrame:
    """Plane near height 0.2 in the Klein ball, outward side upwards"""
    return PlaneFrame.from_plane(HPlane.from_klein([0.1, 0.2, 1.0], -0.2))


# Metric deformations


def _warped_torus_metric(x: np.ndarray, t: float) -> np.ndarray:
    """Solid-torus Fermi chart (s, x, y): (1+t)^2 cosh^2 r ds^2 + dr^2 + sinh^2 r dphi^2"""
    p = np.asarray(x[1:], dtype=float)
    r2 = float(p @ p)
    if r2 < 1e-6:
        phi = 1.0 / 3.0 + 2.0 * r2 / 45.0
    else:
        r = math.sqrt(r2)
        phi = ((math.sinh(r) / r) ** 2 - 1.0) / r2
    g = np.zeros((3, 3))
    g[0, 0] = (1.0 + t) ** 2 * math.cosh(math.sqrt(r2)) ** 2
    g[1:, 1:] = np.eye(2) + phi * (r2 * np.eye(2) - np.outer(p, p))
    return g


def warped_torus_deformation(core_length: float = 1.3) -> MetricDeformation:
    return MetricDeformation(
        "warped-torus-v1",
        _warped_torus_metric,
        lambda x: np.diag([2.0 * math.cosh(math.hypot(x[1], x[2])) ** 2, 0.0, 0.0]),
        lambda s: np.array([s, 0.0, 0.0]),
        lambda s: np.array([1.0, 0.0, 0.0]),
        lambda s: np.zeros(3),
        (0.0, core_length),
    )


def _fermi_metric(x: np.ndarray) -> np.ndarray:
    return np.diag([math.cosh(x[1]) ** 2, 1.0])


def conformal_sine_deformation(length: float = 2.0) -> MetricDeformation:
    """g_t = exp(2 t sin x) g_0 on the Fermi chart of a plane; the curve is the base geodesic"""
    return MetricDeformation(
        "conformal-sine-v1",
        lambda x, t: math.exp(2.0 * t * math.sin(x[0])) * _fermi_metric(x),
        lambda x: 2.0 * math.sin(x[0]) * _fermi_metric(x),
        lambda s: np.array([s, 0.0]),
        lambda s: np.array([1.0, 0.0]),
        lambda s: np.zeros(2),
        (0.0, length),
    )


def static_deformation(length: float = 1.0) -> MetricDeformation:
    return MetricDeformation(
        "static-v1",
        lambda x, t: _fermi_metric(x),
        lambda x: np.zeros((2, 2)),
        lambda s: np.array([s, 0.0]),
        lambda s: np.array([1.0, 0.0]),
        lambda s: np.zeros(2),
        (0.0, length),
    )


METRIC_DEFORMATIONS = {
    "warped-torus-v1": warped_torus_deformation,
    "conformal-sine-v1": conformal_sine_deformation,
    "static-v1": static_deformation,
}


def metric_deformation(name: str, **params) -> MetricDeformation:
    key = strip_prefix(name)
    if key not in METRIC_DEFORMATIONS:
        raise KeyError(f"unknown metric deformation {name!r}")
    return METRIC_DEFORMATIONS[key](**params)


# Bent chains

CHAIN_RADIUS = 0.5
CHAIN_DIRECTIONS = (0.0, 0.6)


def circle_chain(directions=CHAIN_DIRECTIONS) -> BentChain:
    """Two planes tangent to the circle of radius 0.5 about the origin of x3 = 0"""
    return BentChain.tangent_to_circle(MPoint.origin(), CHAIN_RADIUS, directions)
