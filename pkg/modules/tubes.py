"""
Equidistant-surface geometry in hyperbolic 3-space

Closed-form fundamental forms of epsilon-surfaces from planes, lines and points,
a numerical counterpart computed from embedded charts, tube volumes over flat
pieces, bending lines, vertices and solid-torus cores, the dual-volume
expansion of epsilon-neighbourhoods, and the convexity margin of deformed
equidistant surfaces.

Conventions: outward unit normal nu, shape operator B = -D nu,
II(U, V) = <nu, D_U V>, H = tr(I^-1 II), K_e = det(I^-1 II). Convex bodies have
II negative semi-definite.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigh

from modules.finite_difference import partial_derivatives
from modules.minkowski_core import (
    GeometryError, HPlane, MPoint, mink, minkowski_complement, project_to_sheet,
)
from modules.polyhedra import ConvexPolyhedron, DEFAULT_TOL, volume

logger = logging.getLogger(__name__)

CHART_STEP = 2e-3
CONVEXITY_TOL = 1e-9
TORUS_WEIGHT = 2.0 * math.pi
_SIGNS = np.array([-1.0, 1.0, 1.0, 1.0])

Chart = Callable[[float, float], np.ndarray]


class DiffeomorphismError(ValueError):
    """Raised when a deformation map is not a local diffeomorphism near a sample point"""


@dataclass(frozen=True, eq=False)
class FundamentalForms:
    """First and second fundamental forms at a surface point in a chart basis"""
    I: np.ndarray
    II: np.ndarray
    H: float
    K_e: float

    @classmethod
    def from_forms(cls, I, II) -> "FundamentalForms":
        I = np.array(I, dtype=float)
        II = np.array(II, dtype=float)
        I = 0.5 * (I + I.T)
        II = 0.5 * (II + II.T)
        if np.linalg.eigvalsh(I).min() <= 0:
            raise GeometryError(f"first fundamental form is not positive definite: {I.tolist()}")
        shape = np.linalg.solve(I, II)
        I.setflags(write=False)
        II.setflags(write=False)
        return cls(I, II, float(np.trace(shape)), float(np.linalg.det(shape)))

    def shape_operator(self) -> np.ndarray:
        return np.linalg.solve(self.I, self.II)

    def principal_curvatures(self) -> np.ndarray:
        """Eigenvalues of I^-1 II in increasing order"""
        return eigh(self.II, self.I, eigvals_only=True)

    def area_element(self) -> float:
        return math.sqrt(np.linalg.det(self.I))

    def is_convex(self, tol: float = CONVEXITY_TOL) -> bool:
        return bool(self.principal_curvatures()[-1] <= tol)


def tensor_product(I: np.ndarray, A: np.ndarray, B: np.ndarray) -> float:
    """Scalar product of symmetric 2-tensors induced by I: tr(I^-1 A I^-1 B)"""
    Ia = np.linalg.solve(I, A)
    Ib = np.linalg.solve(I, B)
    return float(np.trace(Ia @ Ib))


# Closed forms


def plane_tube_forms(eps: float, point: Tuple[float, float] = (0.0, 0.0)) -> FundamentalForms:
    """
    Forms of the eps-surface of a plane in the Fermi chart (u, v) of the plane

    The plane metric in that chart is cosh^2(v) du^2 + dv^2; the eps-surface
    has I = cosh^2(eps) g_P and II = -tanh(eps) I.
    """
    if eps < 0:
        raise ValueError(f"eps must be non-negative, got {eps}")
    _, v = point
    g = np.diag([math.cosh(v) ** 2, 1.0])
    I = math.cosh(eps) ** 2 * g
    return FundamentalForms.from_forms(I, -math.tanh(eps) * I)


def line_tube_forms(eps: float, s: float = 0.0, theta: float = 0.0) -> FundamentalForms:
    """
    Forms of the eps-surface of a geodesic in the chart (s, theta)

    Raises:
        ValueError: eps <= 0, where the chart degenerates
    """
    if eps <= 0:
        raise ValueError(f"line tube chart is degenerate at eps={eps}")
    I = np.diag([math.cosh(eps) ** 2, math.sinh(eps) ** 2])
    II = -math.cosh(eps) * math.sinh(eps) * np.eye(2)
    return FundamentalForms.from_forms(I, II)


def vertex_tube_forms(eps: float, theta: float = 0.5 * math.pi, phi: float = 0.0) -> FundamentalForms:
    """Forms of the geodesic sphere of radius eps in polar angles (theta, phi)"""
    if eps <= 0:
        raise ValueError(f"sphere chart is degenerate at eps={eps}")
    g = np.diag([1.0, math.sin(theta) ** 2])
    I = math.sinh(eps) ** 2 * g
    return FundamentalForms.from_forms(I, -math.sinh(eps) * math.cosh(eps) * g)


# Embedded charts


@dataclass(frozen=True, eq=False)
class PlaneFrame:
    """Base point p on a plane, orthonormal tangents e1, e2 in the plane and its unit normal n"""
    p: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    n: np.ndarray

    @classmethod
    def standard(cls) -> "PlaneFrame":
        """The plane x3 = 0 through the origin, outward normal e3"""
        basis = np.eye(4)
        return cls(basis[0], basis[1], basis[2], basis[3])

    @classmethod
    def from_plane(cls, plane: HPlane, base: Optional[MPoint] = None) -> "PlaneFrame":
        n = plane.n
        x = MPoint.origin().x if base is None else base.x
        p = project_to_sheet(x - mink(x, n) * n)
        tangents = minkowski_complement(np.vstack([p, n]))
        e1 = tangents[0] / math.sqrt(mink(tangents[0], tangents[0]))
        e2 = tangents[1] - mink(tangents[1], e1) * e1
        e2 = e2 / math.sqrt(mink(e2, e2))
        return cls(p, e1, e2, n)

    def point(self, u: float, v: float) -> np.ndarray:
        """Fermi chart: cosh(v) (cosh(u) p + sinh(u) e1) + sinh(v) e2"""
        along = math.cosh(u) * self.p + math.sinh(u) * self.e1
        return math.cosh(v) * along + math.sinh(v) * self.e2

    def tube_chart(self, eps: float) -> Chart:
        return lambda u, v: math.cosh(eps) * self.point(u, v) + math.sinh(eps) * self.n

    def tube_normal(self, eps: float, u: float, v: float) -> np.ndarray:
        return math.sinh(eps) * self.point(u, v) + math.cosh(eps) * self.n


@dataclass(frozen=True, eq=False)
class LineFrame:
    """Geodesic s -> cosh(s) p + sinh(s) u with parallel unit normals w1, w2"""
    p: np.ndarray
    u: np.ndarray
    w1: np.ndarray
    w2: np.ndarray

    @classmethod
    def standard(cls) -> "LineFrame":
        basis = np.eye(4)
        return cls(basis[0], basis[1], basis[2], basis[3])

    def point(self, s: float) -> np.ndarray:
        return math.cosh(s) * self.p + math.sinh(s) * self.u

    def radial(self, theta: float) -> np.ndarray:
        return math.cos(theta) * self.w1 + math.sin(theta) * self.w2

    def tube_chart(self, eps: float) -> Chart:
        return lambda s, theta: math.cosh(eps) * self.point(s) + math.sinh(eps) * self.radial(theta)

    def tube_normal(self, eps: float, s: float, theta: float) -> np.ndarray:
        return math.sinh(eps) * self.point(s) + math.cosh(eps) * self.radial(theta)


@dataclass(frozen=True, eq=False)
class SphereFrame:
    """Centre c with an orthonormal tangent frame e1, e2, e3"""
    c: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    @classmethod
    def standard(cls) -> "SphereFrame":
        basis = np.eye(4)
        return cls(basis[0], basis[1], basis[2], basis[3])

    def direction(self, theta: float, phi: float) -> np.ndarray:
        return (math.sin(theta) * math.cos(phi) * self.e1
                + math.sin(theta) * math.sin(phi) * self.e2
                + math.cos(theta) * self.e3)

    def tube_chart(self, eps: float) -> Chart:
        return lambda theta, phi: math.cosh(eps) * self.c + math.sinh(eps) * self.direction(theta, phi)

    def tube_normal(self, eps: float, theta: float, phi: float) -> np.ndarray:
        return math.sinh(eps) * self.c + math.cosh(eps) * self.direction(theta, phi)


def _unit_normal(c: np.ndarray, c_u: np.ndarray, c_v: np.ndarray, hint: np.ndarray) -> np.ndarray:
    _, _, vt = np.linalg.svd(np.vstack([c, c_u, c_v]) * _SIGNS)
    nu = vt[-1]
    q = mink(nu, nu)
    if q <= 0:
        raise GeometryError("embedded chart has no spacelike normal at this point")
    nu = nu / math.sqrt(q)
    return nu if mink(nu, hint) > 0 else -nu


def embedded_forms(chart: Chart, u: float, v: float,
                   outward_hint: Union[np.ndarray, Callable[[float, float], np.ndarray]],
                   step: float = CHART_STEP) -> FundamentalForms:
    """
    Fundamental forms of an embedded surface computed by finite differences

    Args:
        chart: (u, v) -> point on the hyperboloid
        u, v: chart coordinates of the evaluation point
        outward_hint: vector (or function of (u, v)) with positive product against the outward normal
        step: chart step of the fourth-order stencils

    Returns:
        FundamentalForms with I the Minkowski Gram matrix of the chart derivatives
        and II_ij = <nu, d_i d_j c>
    """
    c, c_u, c_v, c_uu, c_uv, c_vv = partial_derivatives(chart, u, v, step)
    hint = outward_hint(u, v) if callable(outward_hint) else np.asarray(outward_hint)
    nu = _unit_normal(c, c_u, c_v, hint)
    I = np.array([[mink(c_u, c_u), mink(c_u, c_v)], [mink(c_u, c_v), mink(c_v, c_v)]])
    II = np.array([[mink(nu, c_uu), mink(nu, c_uv)], [mink(nu, c_uv), mink(nu, c_vv)]])
    return FundamentalForms.from_forms(I, II)


# Tube volumes and mean curvature integrals


TUBE_KINDS = ("flat", "wedge", "vertex", "torus", "core", "chain")


@dataclass(frozen=True, eq=False)
class TubeSpec:
    """
    Base of an eps-neighbourhood together with eps

    flat uses area, wedge uses theta and length, vertex uses omega, torus uses
    length and weight, core uses chi and lmu, chain uses a BentChain window.
    """
    kind: str
    eps: float
    area: float = 0.0
    length: float = 0.0
    theta: float = 0.0
    omega: float = 0.0
    weight: float = TORUS_WEIGHT
    chi: int = 0
    lmu: float = 0.0
    chain: object = None

    def __post_init__(self):
        if self.kind not in TUBE_KINDS:
            raise ValueError(f"unknown tube kind {self.kind!r}, expected one of {TUBE_KINDS}")
        if self.eps < 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")
        for name in ("area", "length", "theta", "omega", "weight", "lmu"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.theta > 2.0 * math.pi:
            raise ValueError(f"wedge angle {self.theta} exceeds 2 pi")
        if self.omega > 4.0 * math.pi:
            raise ValueError(f"solid angle {self.omega} exceeds 4 pi")
        if self.chi > 0:
            raise ValueError(f"core Euler characteristic must be <= 0, got {self.chi}")
        if self.kind == "chain" and self.chain is None:
            raise ValueError("chain tube spec needs a BentChain")


def flat_tube_volume(area: float, eps: float) -> float:
    """Slab over a plane patch: area/2 (sinh(2 eps)/2 + eps)"""
    return 0.5 * area * (0.5 * math.sinh(2.0 * eps) + eps)


def wedge_tube_volume(theta: float, length: float, eps: float) -> float:
    """Wedge over a geodesic segment: theta l (cosh(2 eps) - 1) / 4"""
    return 0.25 * theta * length * (math.cosh(2.0 * eps) - 1.0)


def vertex_tube_volume(omega: float, eps: float) -> float:
    """Cone over a vertex with exterior solid angle omega: omega (sinh(2 eps) - 2 eps) / 4"""
    return 0.25 * omega * (math.sinh(2.0 * eps) - 2.0 * eps)


def tube_volume(spec: TubeSpec) -> float:
    """Volume of the eps-neighbourhood minus its base"""
    eps = spec.eps
    if spec.kind == "flat":
        return flat_tube_volume(spec.area, eps)
    if spec.kind == "wedge":
        return wedge_tube_volume(spec.theta, spec.length, eps)
    if spec.kind == "vertex":
        return vertex_tube_volume(spec.omega, eps)
    if spec.kind == "torus":
        return wedge_tube_volume(spec.weight, spec.length, eps)
    if spec.kind == "core":
        return flat_tube_volume(2.0 * math.pi * abs(spec.chi), eps) + wedge_tube_volume(1.0, spec.lmu, eps)
    chain = spec.chain
    return (math.fsum(flat_tube_volume(a, eps) for a in chain.face_areas())
            + math.fsum(wedge_tube_volume(th, chain.segment_length, eps) for th in chain.angles))


def core_mean_curvature_integral(chi: int, lmu: float, eps: float) -> float:
    """Integral of H over the eps-surface of a core: -2 pi |chi| sinh(2 eps) - lmu cosh(2 eps)"""
    return -2.0 * math.pi * abs(chi) * math.sinh(2.0 * eps) - lmu * math.cosh(2.0 * eps)


def mean_curvature_integral(spec: TubeSpec) -> float:
    """
    Integral of the mean curvature over the eps-surface of the base

    Pieces multiply H by the area element of the closed-form charts; chain
    windows sum these over their face patches and bending segments.
    """
    eps = spec.eps
    if spec.kind == "core":
        return core_mean_curvature_integral(spec.chi, spec.lmu, eps)
    if spec.kind == "flat":
        return _plane_piece(spec.area, eps)
    if spec.kind == "wedge":
        return _line_piece(spec.theta * spec.length, eps)
    if spec.kind == "torus":
        return _line_piece(spec.weight * spec.length, eps)
    if spec.kind == "vertex":
        if eps == 0:
            return 0.0
        forms = vertex_tube_forms(eps)
        return forms.H * math.sinh(eps) ** 2 * spec.omega
    chain = spec.chain
    return (math.fsum(_plane_piece(a, eps) for a in chain.face_areas())
            + math.fsum(_line_piece(th * chain.segment_length, eps) for th in chain.angles))


def _plane_piece(area: float, eps: float) -> float:
    forms = plane_tube_forms(eps)
    return forms.H * math.cosh(eps) ** 2 * area


def _line_piece(theta_length: float, eps: float) -> float:
    if eps == 0:
        return -theta_length
    forms = line_tube_forms(eps)
    return forms.H * forms.area_element() * theta_length


def core_dual_volume_expansion(vstar0: float, lmu: float, chi: int, eps: float) -> float:
    """
    Dual volume of the eps-neighbourhood of a convex core

    Vol*(N_eps) = Vol*_0 - lmu/4 (cosh 2eps - 1) - pi/2 |chi| (sinh 2eps - 2eps)
    """
    if eps < 0:
        raise ValueError(f"eps must be non-negative, got {eps}")
    return (vstar0
            - 0.25 * lmu * (math.cosh(2.0 * eps) - 1.0)
            - 0.5 * math.pi * abs(chi) * (math.sinh(2.0 * eps) - 2.0 * eps))


def solid_torus_dual_volume(length: float, eps: float) -> float:
    """Vol(N_eps) + 1/2 int H for the solid-torus core geodesic of the given length"""
    spec = TubeSpec("torus", eps, length=length)
    return tube_volume(spec) + 0.5 * mean_curvature_integral(spec)


def solid_torus_closed_form(length: float, eps: float) -> float:
    return -math.pi * length * math.cosh(eps) ** 2


def neighborhood_dual_volume(P: ConvexPolyhedron, eps: float, tol: float = DEFAULT_TOL,
                             base_volume: Optional[float] = None) -> float:
    """
    Dual volume of the eps-neighbourhood of a polyhedron assembled piecewise

    Vol(N_eps P) is Vol(P) plus slabs over faces, wedges over edges and cones over
    vertices; the boundary term is half the mean curvature integral of the same pieces.
    """
    vol = volume(P, tol) if base_volume is None else base_volume
    pieces = [TubeSpec("flat", eps, area=P.face_area(f)) for f in range(len(P.faces))]
    pieces += [TubeSpec("wedge", eps, theta=e.exterior_angle, length=e.length) for e in P.edges]
    pieces += [TubeSpec("vertex", eps, omega=P.exterior_solid_angle(v)) for v in range(len(P.vertices))]
    tube = math.fsum(tube_volume(s) for s in pieces)
    boundary = math.fsum(mean_curvature_integral(s) for s in pieces)
    return vol + tube + 0.5 * boundary


def polyhedron_dual_volume_expansion(P: ConvexPolyhedron, eps: float, tol: float = DEFAULT_TOL,
                                     base_volume: Optional[float] = None) -> float:
    """Core expansion with Vol*_0 = Vol*(P), lmu = sum l theta, plus face and vertex corrections"""
    vol = volume(P, tol) if base_volume is None else base_volume
    bending = P.total_bending()
    core = core_dual_volume_expansion(vol - 0.5 * bending, bending, 0, eps)
    faces = 0.25 * P.total_face_area() * (math.sinh(2.0 * eps) - 2.0 * eps)
    vertices = 0.25 * P.total_solid_angle() * (math.sinh(2.0 * eps) + 2.0 * eps)
    return core - faces - vertices


# Convexity margin of deformed equidistant surfaces


@dataclass(frozen=True, eq=False)
class DiffeoFamily:
    """One-parameter family of maps F_t of H^3 with F_0 the identity, acting on hyperboloid vectors"""
    name: str
    mapping: Callable[[float, np.ndarray], np.ndarray]

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        y = np.asarray(self.mapping(t, x), dtype=float)
        if y[0] <= 0 or abs(mink(y, y) + 1.0) > 1e-9 * max(1.0, y[0] ** 2):
            raise DiffeomorphismError(f"{self.name} leaves the hyperboloid at t={t}")
        return y


def site_grid(radius: float = 0.25, n: int = 5) -> List[Tuple[float, float]]:
    """Square grid of chart points on the eps-surface inside a ball of the given radius"""
    ticks = np.linspace(-radius, radius, n)
    return [(float(u), float(v)) for u in ticks for v in ticks]


def pushed_forward_forms(F: DiffeoFamily, frame: PlaneFrame, eps: float, t: float,
                         u: float, v: float, step: float = CHART_STEP) -> FundamentalForms:
    """Forms of F_t applied to the eps-surface of the plane, in the plane's Fermi chart"""
    chart = frame.tube_chart(eps)
    outer = frame.tube_chart(eps + 1e-4)
    try:
        return embedded_forms(
            lambda a, b: F.apply(t, chart(a, b)),
            u, v,
            lambda a, b: F.apply(t, outer(a, b)) - F.apply(t, chart(a, b)),
            step,
        )
    except GeometryError as e:
        raise DiffeomorphismError(f"{F.name} is not a local diffeomorphism near ({u}, {v}) at t={t}: {e}")


def convexity_margin(F: DiffeoFamily, frame: PlaneFrame, eps: float, t: float,
                     sites: Sequence[Tuple[float, float]]) -> float:
    """
    Largest eigenvalue of I_t^-1 (II_t + tanh(eps) I_t) over the sample points

    Raises:
        DiffeomorphismError: if F_t degenerates near a sample point
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    worst = -math.inf
    for u, v in sites:
        forms = pushed_forward_forms(F, frame, eps, t, u, v)
        shifted = forms.II + math.tanh(eps) * forms.I
        worst = max(worst, float(eigh(shifted, forms.I, eigvals_only=True)[-1]))
    logger.debug(f"convexity margin {F.name} eps={eps} t={t}: {worst:.3e}")
    return worst


def fit_margin_constant(F: DiffeoFamily, frame: PlaneFrame, eps: float,
                        times: Sequence[float], sites: Sequence[Tuple[float, float]]) -> Tuple[float, List[float]]:
    """
    Smallest D with margin(t) <= D |t| on the sampled nonzero times

    Returns:
        (D, margins in the order of times)
    """
    margins = [convexity_margin(F, frame, eps, t, sites) for t in times]
    ratios = [max(m, 0.0) / abs(t) for m, t in zip(margins, times) if t != 0]
    return (max(ratios) if ratios else 0.0), margins


def image_stays_convex(F: DiffeoFamily, frame: PlaneFrame, eps: float, t: float,
                       sites: Sequence[Tuple[float, float]]) -> Tuple[bool, float]:
    """Whether F_t of the eps-surface is locally convex at every site, with the worst curvature"""
    worst = max(
        float(pushed_forward_forms(F, frame, eps, t, u, v).principal_curvatures()[-1])
        for u, v in sites
    )
    return worst <= CONVEXITY_TOL, worst


def convexity_radius(D: float, t: float) -> float:
    """Smallest eps with tanh(eps) >= D |t|, beyond which F_t keeps the eps-surface convex"""
    bound = D * abs(t)
    if bound >= 1.0:
        return math.inf
    return math.atanh(bound)
