"""
Variation formulas for volume and dual volume

Polyhedral checks compare finite differences of Vol, Vol* and W along a
PolyhedronFamily with the edge-data sums; smooth checks compare the derivative
of the dual volume of closed-form model families with the surface integral
1/4 int <dI, H I - II> da. Also houses the monotonicity, continuity and
epsilon-limit checks of the dual volume.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from modules.finite_difference import Stencil, central_difference, richardson_limit
from modules.minkowski_core import Isometry, MPoint
from modules.polyhedra import (
    CombinatorialChangeError, ConvexPolyhedron, DEFAULT_TOL, EdgeDerivative, PolyhedronFamily,
    apply_isometry, dual_volume, edge_data_derivative, hull, stencil_polyhedra, volume,
    volume_pattern,
)
from modules.quadrature import tensor_gauss_legendre
from modules.tubes import (
    FundamentalForms, line_tube_forms, neighborhood_dual_volume, plane_tube_forms,
    tensor_product, vertex_tube_forms,
)

logger = logging.getLogger(__name__)

SMOOTH_STEP = 1e-3
SMOOTH_ORDER = 4
CONVENTION_TOL = 1e-9
CONTAINMENT_TOL = 1e-9
EPSILON_GRID = (0.02, 0.01, 0.005, 0.0025)
EPSILON_ORDERS = (1, 2, 3)


class ConventionError(ValueError):
    """Raised when two computations of the same curvature quantity disagree"""


@dataclass(frozen=True)
class VariationReport:
    t: float
    lhs: float
    rhs: float
    residual: float
    stencil: Tuple[float, int]
    label: str = ""

    @classmethod
    def build(cls, t: float, lhs: float, rhs: float, stencil: Stencil, label: str) -> "VariationReport":
        return cls(t, lhs, rhs, abs(lhs - rhs), stencil.as_tuple(), label)


# Polyhedral variation


def _stencil_volumes(F: PolyhedronFamily, t: float, h: float, tol: float):
    """Volumes at t -/+ h on the subdivision adapted at t, plus the stencil polyhedra"""
    minus, centre, plus = stencil_polyhedra(F, t, h)
    _, pattern = volume_pattern(centre, tol)
    return volume(minus, pattern=pattern), volume(plus, pattern=pattern), (minus, centre, plus)


def volume_derivative(F: PolyhedronFamily, t: float, h: float, kind: str = "volume",
                      tol: float = DEFAULT_TOL) -> float:
    """
    Central difference of volume, dual volume or W-volume along the family

    Both stencil volumes reuse the quadrature pattern adapted at t.
    """
    v_minus, v_plus, (minus, _, plus) = _stencil_volumes(F, t, h, tol)
    weight = {"volume": 0.0, "dual": 0.5, "w": 0.25}[kind]
    lhs_minus = v_minus - weight * minus.total_bending()
    lhs_plus = v_plus - weight * plus.total_bending()
    return (lhs_plus - lhs_minus) / (2.0 * h)


def _sums(edges: Sequence[EdgeDerivative]) -> Tuple[float, float]:
    """(sum l d_theta, sum theta d_l)"""
    return (math.fsum(e.length * e.d_angle for e in edges),
            math.fsum(e.angle * e.d_length for e in edges))


def schlafli_check(F: PolyhedronFamily, t: float, h: float, tol: float = DEFAULT_TOL) -> VariationReport:
    """dVol against 1/2 sum l(e) d_theta(e)"""
    lhs = volume_derivative(F, t, h, "volume", tol)
    l_dtheta, _ = _sums(edge_data_derivative(F, t, h))
    return VariationReport.build(t, lhs, 0.5 * l_dtheta, Stencil(h), "Schlafli formula")


def dual_schlafli_check(F: PolyhedronFamily, t: float, h: float, tol: float = DEFAULT_TOL) -> VariationReport:
    """dVol* against -1/2 sum theta(e) dl(e)"""
    lhs = volume_derivative(F, t, h, "dual", tol)
    _, theta_dl = _sums(edge_data_derivative(F, t, h))
    return VariationReport.build(t, lhs, -0.5 * theta_dl, Stencil(h), "dual Schlafli formula (polyhedral analog)")


def w_schlafli_check(F: PolyhedronFamily, t: float, h: float, tol: float = DEFAULT_TOL) -> VariationReport:
    """dW against 1/4 sum (l d_theta - theta dl)"""
    lhs = volume_derivative(F, t, h, "w", tol)
    l_dtheta, theta_dl = _sums(edge_data_derivative(F, t, h))
    return VariationReport.build(t, lhs, 0.25 * (l_dtheta - theta_dl), Stencil(h), "W-volume variation")


def algebraic_identity_residual(edges: Sequence[EdgeDerivative]) -> float:
    """|dVol* - (dVol - 1/2 sum (theta dl + l d_theta))| with both sides taken from the edge data"""
    l_dtheta, theta_dl = _sums(edges)
    d_vol = 0.5 * l_dtheta
    d_dual = -0.5 * theta_dl
    return abs(d_dual - (d_vol - 0.5 * (theta_dl + l_dtheta)))


# Smooth model families

SMOOTH_KINDS = ("geodesic_sphere", "plane_tube", "line_tube")


@dataclass(frozen=True)
class SmoothFamilySpec:
    """
    Closed-form family of convex bodies moving by normal flow

    geodesic_sphere: ball of radius r(t) = start + speed t
    plane_tube: eps(t)-neighbourhood of a plane over the window [0, width] x [-half_height, half_height]
    line_tube: eps(t)-neighbourhood of a geodesic segment of the given length, full angle theta0
    """
    kind: str
    start: float
    speed: float = 1.0
    width: float = 1.0
    half_height: float = 0.5
    length: float = 1.0
    theta0: float = 2.0 * math.pi

    def __post_init__(self):
        if self.kind not in SMOOTH_KINDS:
            raise ValueError(f"unknown smooth family {self.kind!r}, expected one of {SMOOTH_KINDS}")
        if self.start <= 0:
            raise ValueError(f"{self.kind} needs a positive starting radius, got {self.start}")
        if self.speed < 0:
            raise ValueError(f"normal speed must be non-negative, got {self.speed}")

    def radius(self, t: float) -> float:
        r = self.start + self.speed * t
        if r <= 0:
            raise ValueError(f"{self.kind} degenerates at t={t}")
        return r

    def chart_bounds(self) -> List[Tuple[float, float]]:
        if self.kind == "geodesic_sphere":
            return [(0.0, math.pi), (0.0, 2.0 * math.pi)]
        if self.kind == "plane_tube":
            return [(0.0, self.width), (-self.half_height, self.half_height)]
        return [(0.0, self.length), (0.0, self.theta0)]

    def forms(self, t: float, point: Tuple[float, float]) -> FundamentalForms:
        r = self.radius(t)
        u, v = point
        if self.kind == "geodesic_sphere":
            return vertex_tube_forms(r, u, v)
        if self.kind == "plane_tube":
            return plane_tube_forms(r, (u, v))
        return line_tube_forms(r, u, v)

    def delta_I(self, t: float, point: Tuple[float, float]) -> np.ndarray:
        """Closed-form time derivative of the first fundamental form, -2 f II for normal speed f"""
        return -2.0 * self.speed * self.forms(t, point).II

    def delta_I_residual(self, t: float, point: Tuple[float, float], h: float = SMOOTH_STEP) -> float:
        fd = central_difference(lambda s: self.forms(s, point).I, t, h, order=SMOOTH_ORDER)
        return float(np.abs(fd - self.delta_I(t, point)).max())

    def base_area(self) -> float:
        if self.kind == "plane_tube":
            return self.width * 2.0 * math.sinh(self.half_height)
        if self.kind == "line_tube":
            return self.theta0 * self.length
        return 4.0 * math.pi

    def dual_volume(self, t: float) -> float:
        """Vol + 1/2 int H da in closed form"""
        r = self.radius(t)
        if self.kind == "geodesic_sphere":
            return -math.pi * (math.sinh(2.0 * r) + 2.0 * r)
        if self.kind == "plane_tube":
            return self.base_area() * (0.5 * r - 0.25 * math.sinh(2.0 * r))
        return -0.5 * self.base_area() * math.cosh(r) ** 2


def _variation_integrand(S: SmoothFamilySpec, t: float, point: Tuple[float, float]) -> float:
    forms = S.forms(t, point)
    return tensor_product(forms.I, S.delta_I(t, point), forms.H * forms.I - forms.II)


def smooth_dual_variation_check(S: SmoothFamilySpec, t: float, h: float = SMOOTH_STEP,
                                nodes: int = 16) -> VariationReport:
    """
    Derivative of Vol* along a model family against 1/4 int <dI, H I - II> da

    The left side is a fourth-order central difference of the closed-form dual
    volume; the right side is a tensor Gauss-Legendre rule on the chart.
    """
    stencil = Stencil(h, SMOOTH_ORDER)
    lhs = float(central_difference(S.dual_volume, t, h, order=SMOOTH_ORDER))
    points, weights = tensor_gauss_legendre(S.chart_bounds(), nodes)
    terms = []
    for (u, v), w in zip(points, weights):
        forms = S.forms(t, (u, v))
        terms.append(w * _variation_integrand(S, t, (u, v)) * forms.area_element())
    rhs = 0.25 * math.fsum(terms)
    logger.debug(f"smooth variation {S.kind} t={t}: lhs={lhs:.12g} rhs={rhs:.12g}")
    return VariationReport.build(t, lhs, rhs, stencil, f"smooth dual variation ({S.kind})")


def normal_flow_integrand(S: SmoothFamilySpec, t: float, point: Tuple[float, float]) -> float:
    """
    <dI, H I - II> by tensor contraction, checked against -4 f K_e

    Raises:
        ConventionError: if the two values differ by more than 1e-9
    """
    contracted = _variation_integrand(S, t, point)
    curvature = -4.0 * S.speed * S.forms(t, point).K_e
    if abs(contracted - curvature) > CONVENTION_TOL * max(1.0, abs(curvature)):
        raise ConventionError(
            f"normal flow integrand mismatch for {S.kind}: contraction {contracted:.12g}, -4fK_e {curvature:.12g}"
        )
    return contracted


# Monotonicity, continuity and the epsilon limit


def contains(outer: ConvexPolyhedron, inner: ConvexPolyhedron, tol: float = CONTAINMENT_TOL) -> bool:
    return all(
        face.plane.signed_distance(v) <= tol
        for v in inner.vertices for face in outer.faces
    )


def monotonicity_check(inner: ConvexPolyhedron, outer: ConvexPolyhedron,
                       tol: float = DEFAULT_TOL) -> Tuple[bool, Optional[float]]:
    """
    Containment of inner in outer and, when contained, Vol*(inner) - Vol*(outer)

    Non-containment is reported as (False, None).
    """
    if not contains(outer, inner):
        return False, None
    margin = dual_volume(inner, tol) - dual_volume(outer, tol)
    if margin < -CONTAINMENT_TOL:
        logger.warning(f"dual volume increased under inclusion by {-margin:.3e}")
    return True, margin


def nested_pair(rng: np.random.Generator, outer_points: int = 8, inner_points: int = 6,
                radius: float = 0.6) -> Tuple[ConvexPolyhedron, ConvexPolyhedron]:
    """Random outer hull in a Klein ball and an inner hull of convex combinations of its vertices"""
    directions = rng.normal(size=(outer_points, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    klein = directions * radius * rng.uniform(0.5, 1.0, size=(outer_points, 1))
    outer = hull([MPoint.from_klein(y) for y in klein])
    corners = outer.klein_vertices()
    weights = rng.dirichlet(np.ones(len(corners)), size=inner_points)
    inner = hull([MPoint.from_klein(y) for y in weights @ corners])
    return inner, outer


def _unit_ball_samples(rng: np.random.Generator, count: int, n_vertices: int) -> np.ndarray:
    directions = rng.normal(size=(count, n_vertices, 3))
    directions /= np.linalg.norm(directions, axis=2, keepdims=True)
    radii = rng.uniform(size=(count, n_vertices, 1)) ** (1.0 / 3.0)
    return directions * radii


def continuity_modulus(P: ConvexPolyhedron, delta: float, samples: int = 8, seed: int = 0,
                     mode: str = "random", tol: float = DEFAULT_TOL) -> float:
    """
    Sampled modulus of continuity of Vol* at P

    random mode moves each vertex by a Klein vector of norm <= delta; isometry
    mode moves all vertices by boosts of size up to delta. The same seed gives
    perturbations proportional to delta.

    Raises:
        CombinatorialChangeError: if a perturbation changes the face lattice
    """
    if delta < 0:
        raise ValueError(f"perturbation size must be non-negative, got {delta}")
    if mode not in ("random", "isometry"):
        raise ValueError(f"unknown continuity mode {mode!r}")
    base_volume, pattern = volume_pattern(P, tol)
    base = base_volume - 0.5 * P.total_bending()
    if delta == 0:
        return 0.0

    rng = np.random.default_rng(seed)
    klein = P.klein_vertices()
    worst = 0.0
    if mode == "random":
        shifts = _unit_ball_samples(rng, samples, len(klein))
        moved = [hull([MPoint.from_klein(y) for y in klein + delta * s]) for s in shifts]
    else:
        axes = rng.integers(1, 4, size=samples)
        sizes = rng.uniform(-1.0, 1.0, size=samples)
        moved = [apply_isometry(P, Isometry.boost(int(a), delta * s)) for a, s in zip(axes, sizes)]
    for Q in moved:
        if Q.combinatorics != P.combinatorics:
            raise CombinatorialChangeError(f"perturbation of size {delta} changes the face lattice")
        value = volume(Q, pattern=pattern) - 0.5 * Q.total_bending()
        worst = max(worst, abs(value - base))
    logger.debug(f"continuity modulus at delta={delta} ({mode}): {worst:.3e}")
    return worst


def epsilon_limit_check(P: ConvexPolyhedron, grid: Sequence[float] = EPSILON_GRID,
                        orders: Sequence[int] = EPSILON_ORDERS, tol: float = DEFAULT_TOL) -> VariationReport:
    """Richardson limit of Vol*(N_eps P) as eps -> 0 against Vol*(P)"""
    base = volume(P, tol)
    values = [neighborhood_dual_volume(P, eps, base_volume=base) for eps in grid]
    lhs = richardson_limit(grid, values, orders)
    rhs = base - 0.5 * P.total_bending()
    return VariationReport(0.0, lhs, rhs, abs(lhs - rhs), (float(grid[-1]), len(orders)), "epsilon limit")
