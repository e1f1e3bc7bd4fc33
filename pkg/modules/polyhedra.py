"""
Compact convex polyhedra in hyperbolic 3-space

Convex hulls are taken in the Klein model, where hyperbolic convexity is
Euclidean convexity, and lifted back to the hyperboloid for edge lengths and
exterior dihedral angles. Volumes integrate the Klein volume element
(1 - |y|^2)^-2 over a canonical cone decomposition.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.spatial import ConvexHull, QhullError

from modules.minkowski_core import (
    HPlane, Isometry, MPoint, dist, mink, project_to_sheet,
)
from modules.quadrature import (
    QuadraturePattern, integrate_tetrahedra, integrate_with_pattern,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
COPLANAR_TOL = 1e-10
INCIDENCE_TOL = 1e-9
ANGLE_MARGIN = 1e-9


class PolyhedronError(ValueError):
    """Raised for degenerate or invalid polyhedron input"""


class CombinatorialChangeError(PolyhedronError):
    """Raised when a family changes its face lattice where it must be constant"""


@dataclass(frozen=True, eq=False)
class Face:
    """Face plane with its vertex cycle in canonical order"""
    plane: HPlane
    cycle: Tuple[int, ...]


@dataclass(frozen=True)
class Edge:
    vertices: Tuple[int, int]
    faces: Tuple[int, int]
    length: float
    exterior_angle: float

    @property
    def interior_angle(self) -> float:
        return math.pi - self.exterior_angle


@dataclass(frozen=True, eq=False)
class ConvexPolyhedron:
    """
    Compact convex polyhedron with its face lattice and edge data

    Vertex indices refer to positions in `vertices`; `source_indices` maps them
    back to the point list the hull was built from.
    """
    vertices: Tuple[MPoint, ...]
    faces: Tuple[Face, ...]
    edges: Tuple[Edge, ...]
    source_indices: Tuple[int, ...]

    def __post_init__(self):
        V, E, F = len(self.vertices), len(self.edges), len(self.faces)
        if V - E + F != 2:
            raise PolyhedronError(f"Euler characteristic V-E+F = {V - E + F}, expected 2")
        coords = self.vertex_array()
        for f, face in enumerate(self.faces):
            products = mink(coords, face.plane.n)
            scale = coords[:, 0]
            if np.any(np.abs(products[list(face.cycle)]) > INCIDENCE_TOL * scale[list(face.cycle)]):
                raise PolyhedronError(f"face {f} does not contain its vertices")
            if np.any(products > INCIDENCE_TOL * scale):
                raise PolyhedronError(f"a vertex lies outside the half-space of face {f}")
        for edge in self.edges:
            if not ANGLE_MARGIN < edge.exterior_angle < math.pi - ANGLE_MARGIN:
                raise PolyhedronError(
                    f"edge {edge.vertices} has exterior angle {edge.exterior_angle} outside (0, pi)"
                )

    def vertex_array(self) -> np.ndarray:
        return np.array([v.x for v in self.vertices])

    def klein_vertices(self) -> np.ndarray:
        coords = self.vertex_array()
        return coords[:, 1:] / coords[:, :1]

    @property
    def combinatorics(self) -> FrozenSet[FrozenSet[int]]:
        """Face lattice as vertex sets in source numbering"""
        return frozenset(
            frozenset(self.source_indices[i] for i in face.cycle) for face in self.faces
        )

    def total_bending(self) -> float:
        """Sum of length times exterior angle over all edges"""
        return math.fsum(e.length * e.exterior_angle for e in self.edges)

    def face_angles(self, f: int) -> List[float]:
        """Interior angles of face f at each vertex of its cycle"""
        cycle = self.faces[f].cycle
        angles = []
        for k, i in enumerate(cycle):
            v = self.vertices[i].x
            a = self.vertices[cycle[k - 1]].x
            b = self.vertices[cycle[(k + 1) % len(cycle)]].x
            ua = a + mink(a, v) * v
            ub = b + mink(b, v) * v
            c = mink(ua, ub) / math.sqrt(mink(ua, ua) * mink(ub, ub))
            angles.append(math.acos(min(1.0, max(-1.0, c))))
        return angles

    def face_area(self, f: int) -> float:
        """Hyperbolic area of face f from its angle defect"""
        angles = self.face_angles(f)
        return (len(angles) - 2) * math.pi - math.fsum(angles)

    def total_face_area(self) -> float:
        return math.fsum(self.face_area(f) for f in range(len(self.faces)))

    def exterior_solid_angle(self, v: int) -> float:
        """Area of the spherical polygon of outward normals at vertex v"""
        total = 0.0
        for f, face in enumerate(self.faces):
            if v in face.cycle:
                total += self.face_angles(f)[face.cycle.index(v)]
        return 2.0 * math.pi - total

    def total_solid_angle(self) -> float:
        return math.fsum(self.exterior_solid_angle(v) for v in range(len(self.vertices)))

    def cone_tetrahedra(self) -> np.ndarray:
        """
        Klein-model tetrahedra coning the fan-triangulated faces to the vertex centroid

        The order depends only on the combinatorics, so decompositions of nearby
        polyhedra with equal face lattices correspond tetrahedron by tetrahedron.
        """
        y = self.klein_vertices()
        apex = y.mean(axis=0)
        tets = []
        for face in self.faces:
            c = face.cycle
            for k in range(1, len(c) - 1):
                tets.append([apex, y[c[0]], y[c[k]], y[c[k + 1]]])
        return np.array(tets)


def _klein_density(points: np.ndarray) -> np.ndarray:
    return (1.0 - np.einsum("...i,...i->...", points, points)) ** -2


def _face_normal(rows: np.ndarray, inside: np.ndarray) -> np.ndarray:
    """Least-squares unit normal of the plane through the given hyperboloid points"""
    _, _, vt = np.linalg.svd(rows * np.array([-1.0, 1.0, 1.0, 1.0]))
    n = vt[-1]
    q = mink(n, n)
    if q <= 0:
        raise PolyhedronError("face points do not span a hyperbolic plane")
    n = n / math.sqrt(q)
    if mink(inside, n) > 0:
        n = -n
    return n


def _canonical_cycle(indices: Sequence[int], klein: np.ndarray, normal: np.ndarray) -> Tuple[int, ...]:
    """Cyclic order of coplanar points, started at the smallest index, second entry smaller than last"""
    pts = klein[list(indices)]
    centre = pts.mean(axis=0)
    e1 = pts[0] - centre
    e1 = e1 - (e1 @ normal) * normal
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    rel = pts - centre
    order = np.argsort(np.arctan2(rel @ e2, rel @ e1))
    cycle = [indices[k] for k in order]
    start = cycle.index(min(cycle))
    cycle = cycle[start:] + cycle[:start]
    if len(cycle) > 2 and cycle[-1] < cycle[1]:
        cycle = [cycle[0]] + cycle[:0:-1]
    return tuple(cycle)


def hull(points: Sequence[MPoint], tol: float = COPLANAR_TOL) -> ConvexPolyhedron:
    """
    Convex hull of hyperbolic points

    Args:
        points: at least four points, not all coplanar
        tol: relative flatness below which the points count as coplanar, and the
            tolerance for merging hull facets into one face

    Returns:
        ConvexPolyhedron whose vertices are the extreme points, in input order

    Raises:
        PolyhedronError: too few points, coplanar input or degenerate hull
    """
    if len(points) < 4:
        raise PolyhedronError(f"a polyhedron needs at least 4 points, got {len(points)}")
    coords = np.array([p.x for p in points])
    klein = coords[:, 1:] / coords[:, :1]
    if np.any(np.einsum("ij,ij->i", klein, klein) >= 1.0):
        raise PolyhedronError("a point lies outside the unit Klein ball")

    spread = np.linalg.svd(klein - klein.mean(axis=0), compute_uv=False)
    if spread[0] == 0.0 or spread[-1] <= tol * spread[0]:
        raise PolyhedronError("points are coplanar in the Klein model")
    try:
        qhull = ConvexHull(klein)
    except QhullError as e:
        raise PolyhedronError(f"convex hull failed: {e}")

    # Merge coplanar facets of the triangulated hull
    groups: List[Tuple[np.ndarray, float, set]] = []
    for simplex, equation in zip(qhull.simplices, qhull.equations):
        normal, offset = equation[:3], equation[3]
        for g_normal, g_offset, members in groups:
            if abs(normal @ g_normal - 1.0) <= tol and abs(offset - g_offset) <= tol:
                members.update(int(i) for i in simplex)
                break
        else:
            groups.append((normal, offset, set(int(i) for i in simplex)))

    kept = sorted(set().union(*(members for _, _, members in groups)))
    renumber = {old: new for new, old in enumerate(kept)}
    vertices = tuple(points[i] for i in kept)
    inside = project_to_sheet(np.concatenate(([1.0], klein[kept].mean(axis=0))))

    raw_faces = []
    for normal, _, members in groups:
        cycle = _canonical_cycle(sorted(members), klein, normal)
        raw_faces.append(tuple(renumber[i] for i in cycle))
    raw_faces.sort(key=lambda c: tuple(sorted(c)))

    faces = []
    for cycle in raw_faces:
        n = _face_normal(np.array([vertices[i].x for i in cycle]), inside)
        faces.append(Face(HPlane(n), cycle))

    edge_faces: Dict[Tuple[int, int], List[int]] = {}
    for f, face in enumerate(faces):
        c = face.cycle
        for k in range(len(c)):
            key = tuple(sorted((c[k], c[(k + 1) % len(c)])))
            edge_faces.setdefault(key, []).append(f)

    edges = []
    for key in sorted(edge_faces):
        adjacent = edge_faces[key]
        if len(adjacent) != 2:
            raise PolyhedronError(f"edge {key} borders {len(adjacent)} faces")
        f1, f2 = adjacent
        c = mink(faces[f1].plane.n, faces[f2].plane.n)
        edges.append(Edge(
            vertices=key,
            faces=(f1, f2),
            length=dist(vertices[key[0]], vertices[key[1]]),
            exterior_angle=math.acos(min(1.0, max(-1.0, c))),
        ))

    return ConvexPolyhedron(tuple(vertices), tuple(faces), tuple(edges), tuple(kept))


def apply_isometry(P: ConvexPolyhedron, L: Isometry) -> ConvexPolyhedron:
    return hull([L.apply(v) for v in P.vertices])


def volume_pattern(P: ConvexPolyhedron, tol: float = DEFAULT_TOL) -> Tuple[float, QuadraturePattern]:
    """Adaptive volume together with the subdivision that achieved it"""
    if tol < 1e-12:
        raise ValueError(f"volume tolerance must be >= 1e-12, got {tol}")
    return integrate_tetrahedra(_klein_density, P.cone_tetrahedra(), tol)


def volume(P: ConvexPolyhedron, tol: float = DEFAULT_TOL,
           pattern: Optional[QuadraturePattern] = None) -> float:
    """
    Hyperbolic volume by quadrature of the Klein volume element

    Args:
        P: polyhedron
        tol: absolute error target of the adaptive run
        pattern: fixed subdivision to reuse instead of adapting

    Returns:
        Volume of P
    """
    if pattern is not None:
        return integrate_with_pattern(_klein_density, P.cone_tetrahedra(), pattern)
    value, _ = volume_pattern(P, tol)
    return value


def dual_volume(P: ConvexPolyhedron, tol: float = DEFAULT_TOL,
                pattern: Optional[QuadraturePattern] = None) -> float:
    """Vol*(P) = Vol(P) - 1/2 sum l(e) theta(e)"""
    return volume(P, tol, pattern) - 0.5 * P.total_bending()


def w_volume(P: ConvexPolyhedron, tol: float = DEFAULT_TOL,
             pattern: Optional[QuadraturePattern] = None) -> float:
    """W(P), the average of volume and dual volume"""
    return volume(P, tol, pattern) - 0.25 * P.total_bending()


VertexGenerator = Callable[[float, Optional[float]], np.ndarray]


@dataclass(frozen=True, eq=False)
class PolyhedronFamily:
    """
    Differentiable family of polyhedra with a fixed face lattice

    The generator maps (t, anchor) to an (N, 4) array of hyperboloid points;
    anchor lets sample-based families keep one interpolation window across a
    finite-difference stencil.
    """
    name: str
    generator: VertexGenerator
    domain: Tuple[float, float]
    checkpoints: int = 9
    combinatorics: FrozenSet[FrozenSet[int]] = field(init=False)

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"family {self.name} has an empty domain {self.domain}")
        reference = None
        for t in np.linspace(lo, hi, self.checkpoints):
            P = self._hull_at(float(t))
            if reference is None:
                reference = P.combinatorics
            elif P.combinatorics != reference:
                raise CombinatorialChangeError(
                    f"family {self.name} changes combinatorics at t={t:.6g}"
                )
        object.__setattr__(self, "combinatorics", reference)
        logger.info(f"Family {self.name}: {len(reference)} faces, domain {self.domain}")

    @classmethod
    def from_samples(cls, name: str, times: Sequence[float], samples: Sequence[np.ndarray],
                     degree: int = 4) -> "PolyhedronFamily":
        """Family interpolating dense time samples with local polynomials of the given degree"""
        times = np.asarray(times, dtype=float)
        order = np.argsort(times)
        times = times[order]
        stacked = np.array([np.asarray(samples[i], dtype=float).reshape(-1) for i in order])
        n_points = stacked.shape[1] // 4
        if len(times) < degree + 1:
            raise ValueError(f"need at least {degree + 1} samples, got {len(times)}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be distinct")

        def generator(t: float, anchor: Optional[float] = None) -> np.ndarray:
            centre = t if anchor is None else anchor
            nearest = np.argsort(np.abs(times - centre), kind="stable")[: degree + 1]
            window = np.sort(nearest)
            values = BarycentricInterpolator(times[window], stacked[window])(t)
            return np.array([project_to_sheet(x) for x in np.reshape(values, (n_points, 4))])

        return cls(name, generator, (float(times[0]), float(times[-1])))

    def vertex_array(self, t: float, anchor: Optional[float] = None) -> np.ndarray:
        coords = np.asarray(self.generator(t, anchor), dtype=float)
        drift = np.abs(mink(coords, coords) + 1.0)
        if np.any(drift > 1e-10 * np.maximum(1.0, coords[:, 0] ** 2)):
            raise PolyhedronError(f"family {self.name} leaves the hyperboloid at t={t}")
        return coords

    def _hull_at(self, t: float, anchor: Optional[float] = None) -> ConvexPolyhedron:
        coords = self.vertex_array(t, anchor)
        P = hull([MPoint(x) for x in coords])
        if len(P.vertices) != len(coords):
            raise CombinatorialChangeError(
                f"family {self.name}: only {len(P.vertices)} of {len(coords)} points are vertices at t={t}"
            )
        return P

    def polyhedron(self, t: float, anchor: Optional[float] = None) -> ConvexPolyhedron:
        """
        Polyhedron at parameter t

        Raises:
            ValueError: t outside the domain
            CombinatorialChangeError: face lattice differs from the family's
        """
        lo, hi = self.domain
        if not lo - 1e-15 <= t <= hi + 1e-15:
            raise ValueError(f"t={t} outside domain {self.domain} of family {self.name}")
        P = self._hull_at(t, anchor)
        if P.combinatorics != self.combinatorics:
            raise CombinatorialChangeError(f"family {self.name} changes combinatorics at t={t:.6g}")
        return P


@dataclass(frozen=True)
class EdgeDerivative:
    """Edge data and its central-difference derivative at one parameter value"""
    vertices: Tuple[int, int]
    length: float
    angle: float
    d_length: float
    d_angle: float


def stencil_polyhedra(F: PolyhedronFamily, t: float, h: float) -> Tuple[ConvexPolyhedron, ...]:
    """Polyhedra at t - h, t, t + h sharing one interpolation anchor"""
    lo, hi = F.domain
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    if t - h < lo or t + h > hi:
        raise ValueError(f"stencil [{t - h}, {t + h}] leaves domain {F.domain} of family {F.name}")
    try:
        return tuple(F.polyhedron(s, anchor=t) for s in (t - h, t, t + h))
    except CombinatorialChangeError:
        logger.warning(f"Combinatorial change inside stencil of {F.name} at t={t}, h={h}")
        raise


def edge_data_derivative(F: PolyhedronFamily, t: float, h: float) -> List[EdgeDerivative]:
    """
    Central-difference derivatives of edge lengths and exterior angles

    Raises:
        CombinatorialChangeError: if the face lattice changes inside [t - h, t + h]
    """
    minus, centre, plus = stencil_polyhedra(F, t, h)
    data = []
    for e0, em, ep in zip(centre.edges, minus.edges, plus.edges):
        if not e0.vertices == em.vertices == ep.vertices:
            raise CombinatorialChangeError(f"edge sets differ inside stencil at t={t}")
        data.append(EdgeDerivative(
            vertices=e0.vertices,
            length=e0.length,
            angle=e0.exterior_angle,
            d_length=(ep.length - em.length) / (2.0 * h),
            d_angle=(ep.exterior_angle - em.exterior_angle) / (2.0 * h),
        ))
    return data
