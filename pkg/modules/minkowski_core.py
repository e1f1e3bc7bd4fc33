"""
Hyperboloid-model primitives for hyperbolic 3-space

Points live on the upper sheet of {x : <x,x> = -1} in Minkowski space with
signature (-,+,+,+). Planes are unit spacelike normals, isometries are
orthochronous Lorentz matrices with an SL(2,C) counterpart used for traces.
All values are immutable after construction.
"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

logger = logging.getLogger(__name__)

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
_SIGNS = np.array([-1.0, 1.0, 1.0, 1.0])

SHEET_TOL = 1e-12
DRIFT_TOL = 1e-13
DIST_TOL = 1e-9
LORENTZ_TOL = 1e-10

# Hermitian images of the Minkowski basis vectors: x -> [[x0+x3, x1+i x2], [x1-i x2, x0-x3]]
PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, 1j], [-1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class GeometryError(ValueError):
    """Raised when geometric input leaves the model (off-sheet points, degenerate directions)"""


def mink(x, y):
    """Minkowski product along the last axis, broadcasting over leading axes"""
    return np.einsum("...i,...i->...", np.asarray(x) * _SIGNS, np.asarray(y))


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def project_to_sheet(x) -> np.ndarray:
    """Rescale a timelike future vector onto the hyperboloid when drift exceeds DRIFT_TOL"""
    x = np.asarray(x, dtype=float)
    q = -mink(x, x)
    if q <= 0 or x[0] <= 0:
        raise GeometryError(f"vector {x} is not future timelike")
    if abs(q - 1.0) > DRIFT_TOL:
        x = x / np.sqrt(q)
    return x


def minkowski_complement(vectors) -> np.ndarray:
    """
    Basis of the Minkowski-orthogonal complement of the span of the given vectors

    Returns:
        Array of shape (k, 4), one complement vector per row
    """
    rows = np.atleast_2d(np.asarray(vectors, dtype=float))
    return null_space(rows * _SIGNS).T


def klein_to_minkowski(y) -> np.ndarray:
    """Lift a point of the open unit ball (Klein model) to the hyperboloid"""
    y = np.asarray(y, dtype=float)
    r2 = float(y @ y)
    if r2 >= 1.0:
        raise GeometryError(f"Klein point {y.tolist()} lies outside the unit ball")
    return np.concatenate(([1.0], y)) / np.sqrt(1.0 - r2)


@dataclass(frozen=True, eq=False)
class MPoint:
    """Point of H^3 on the upper sheet of the hyperboloid"""
    x: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.x)
        if arr.shape != (4,):
            raise GeometryError(f"MPoint needs 4 coordinates, got shape {arr.shape}")
        if arr[0] < 1.0 - SHEET_TOL:
            raise GeometryError(f"MPoint {arr.tolist()} is not on the upper sheet")
        if abs(mink(arr, arr) + 1.0) > SHEET_TOL * max(1.0, arr[0] ** 2):
            raise GeometryError(f"MPoint {arr.tolist()} is off the hyperboloid")
        object.__setattr__(self, "x", arr)

    @classmethod
    def origin(cls) -> "MPoint":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]))

    @classmethod
    def from_klein(cls, y) -> "MPoint":
        return cls(klein_to_minkowski(y))

    @classmethod
    def on_sheet(cls, x) -> "MPoint":
        """Build a point from a vector that may have drifted off the hyperboloid"""
        return cls(project_to_sheet(x))

    def klein(self) -> np.ndarray:
        return self.x[1:] / self.x[0]

    def allclose(self, other: "MPoint", atol: float = 1e-10) -> bool:
        return bool(np.allclose(self.x, other.x, rtol=0.0, atol=atol))


@dataclass(frozen=True, eq=False)
class TangentVec:
    """Tangent vector v at base, i.e. <base, v> = 0"""
    base: MPoint
    v: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.v)
        if arr.shape != (4,):
            raise GeometryError(f"TangentVec needs 4 coordinates, got shape {arr.shape}")
        scale = 1.0 + float(np.abs(arr).max()) * self.base.x[0]
        if abs(mink(self.base.x, arr)) > SHEET_TOL * scale:
            raise GeometryError("TangentVec is not orthogonal to its base point")
        object.__setattr__(self, "v", arr)

    @classmethod
    def project(cls, base: MPoint, v) -> "TangentVec":
        """Orthogonal projection of an ambient vector onto the tangent space at base"""
        v = np.asarray(v, dtype=float)
        return cls(base, v + mink(v, base.x) * base.x)

    def norm(self) -> float:
        return float(np.sqrt(max(mink(self.v, self.v), 0.0)))

    def normalized(self) -> "TangentVec":
        n = self.norm()
        if n == 0.0:
            raise GeometryError("cannot normalize a zero tangent vector")
        return TangentVec(self.base, self.v / n)

    def dot(self, other: "TangentVec") -> float:
        return float(mink(self.v, other.v))


@dataclass(frozen=True, eq=False)
class HPlane:
    """Totally geodesic plane with outward unit normal n; the half-space is <x, n> <= 0"""
    n: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.n)
        if arr.shape != (4,):
            raise GeometryError(f"HPlane normal needs 4 coordinates, got shape {arr.shape}")
        if abs(mink(arr, arr) - 1.0) > SHEET_TOL * max(1.0, float(np.abs(arr).max()) ** 2):
            raise GeometryError(f"HPlane normal {arr.tolist()} is not a unit spacelike vector")
        object.__setattr__(self, "n", arr)

    @classmethod
    def from_klein(cls, a, b: float) -> "HPlane":
        """Plane {a.y + b = 0} of the Klein ball, outward side a.y + b > 0"""
        a = np.asarray(a, dtype=float)
        norm = float(np.linalg.norm(a))
        a, b = a / norm, b / norm
        if abs(b) >= 1.0:
            raise GeometryError("Klein plane misses the unit ball")
        return cls(np.concatenate(([-b], a)) / np.sqrt(1.0 - b * b))

    @classmethod
    def through(cls, points: Sequence[MPoint], inside: MPoint = None) -> "HPlane":
        """
        Plane through at least three points, oriented so that inside lies in the half-space

        Raises:
            GeometryError: if the points do not span a unique plane
        """
        rows = np.array([p.x for p in points])
        complement = minkowski_complement(rows)
        if complement.shape[0] != 1:
            raise GeometryError(f"{len(points)} points do not span a unique plane")
        n = complement[0]
        q = mink(n, n)
        if q <= 0:
            raise GeometryError("points do not span a hyperbolic plane")
        n = n / np.sqrt(q)
        if inside is not None and mink(inside.x, n) > 0:
            n = -n
        return cls(n)

    def signed_distance(self, p: MPoint) -> float:
        return plane_signed_distance(self, p)

    def contains(self, p: MPoint, tol: float = 1e-9) -> bool:
        return abs(float(mink(p.x, self.n))) <= tol

    def flipped(self) -> "HPlane":
        return HPlane(-self.n)


@dataclass(frozen=True, eq=False)
class HGeodesic:
    """Unit-speed geodesic s -> cosh(s) p + sinh(s) u"""
    p: MPoint
    u: TangentVec

    def __post_init__(self):
        if not np.allclose(self.u.base.x, self.p.x, rtol=0.0, atol=SHEET_TOL):
            raise GeometryError("geodesic direction is not based at its point")
        if abs(self.u.dot(self.u) - 1.0) > 1e-10:
            raise GeometryError("geodesic direction must have unit length")

    @classmethod
    def through(cls, p: MPoint, q: MPoint) -> "HGeodesic":
        """Geodesic from p towards q"""
        w = TangentVec.project(p, q.x)
        if w.norm() == 0.0:
            raise GeometryError("geodesic through coincident points is undefined")
        return cls(p, w.normalized())

    def point(self, s: float) -> MPoint:
        return MPoint.on_sheet(np.cosh(s) * self.p.x + np.sinh(s) * self.u.v)

    def velocity(self, s: float) -> TangentVec:
        return TangentVec(self.point(s), np.sinh(s) * self.p.x + np.cosh(s) * self.u.v)


@dataclass(frozen=True, eq=False)
class Isometry:
    """Orientation- and time-orientation-preserving isometry as a 4x4 Lorentz matrix"""
    L: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.L)
        if arr.shape != (4, 4):
            raise GeometryError(f"Isometry needs a 4x4 matrix, got shape {arr.shape}")
        scale = max(1.0, float(np.abs(arr).max()) ** 2)
        if not np.allclose(arr.T @ ETA @ arr, ETA, rtol=0.0, atol=LORENTZ_TOL * scale):
            raise GeometryError("matrix does not preserve the Minkowski form")
        if arr[0, 0] <= 0 or np.linalg.det(arr) <= 0:
            raise GeometryError("matrix reverses orientation or time orientation")
        object.__setattr__(self, "L", arr)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(np.eye(4))

    @classmethod
    def boost(cls, axis: int, s: float) -> "Isometry":
        """Translation by s along the coordinate geodesic through the origin in direction e_axis"""
        L = np.eye(4)
        L[0, 0] = L[axis, axis] = np.cosh(s)
        L[0, axis] = L[axis, 0] = np.sinh(s)
        return cls(L)

    @classmethod
    def rotation(cls, i: int, j: int, angle: float) -> "Isometry":
        """Rotation by angle about the origin taking e_i towards e_j"""
        L = np.eye(4)
        c, s = np.cos(angle), np.sin(angle)
        L[i, i] = L[j, j] = c
        L[j, i], L[i, j] = s, -s
        return cls(L)

    @classmethod
    def from_sl2c(cls, A) -> "Isometry":
        """Lorentz image of A acting on Hermitian matrices by X -> A X A*"""
        A = np.asarray(A, dtype=complex)
        columns = [hermitian_to_vector(A @ sigma @ A.conj().T) for sigma in PAULI]
        return cls(np.column_stack(columns))

    def to_sl2c(self) -> np.ndarray:
        """One of the two unit-determinant lifts of this isometry"""
        images = [vector_to_hermitian(self.L[:, mu]) for mu in range(4)]
        # sum_mu (A s_mu A*) Q s_mu = 2 tr(A* Q) A for every 2x2 matrix Q
        best = None
        for Q in PAULI:
            M = sum(X @ Q @ sigma for X, sigma in zip(images, PAULI))
            if best is None or np.linalg.norm(M) > np.linalg.norm(best):
                best = M
        return best / np.sqrt(np.linalg.det(best))

    def apply(self, p: MPoint) -> MPoint:
        return MPoint.on_sheet(self.L @ p.x)

    def apply_vector(self, w: TangentVec) -> TangentVec:
        base = self.apply(w.base)
        return TangentVec.project(base, self.L @ w.v)

    def apply_plane(self, plane: HPlane) -> HPlane:
        n = self.L @ plane.n
        return HPlane(n / np.sqrt(mink(n, n)))

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other"""
        return Isometry(self.L @ other.L)

    def inverse(self) -> "Isometry":
        return Isometry(ETA @ self.L.T @ ETA)


def vector_to_hermitian(x) -> np.ndarray:
    x0, x1, x2, x3 = x
    return np.array([[x0 + x3, x1 + 1j * x2], [x1 - 1j * x2, x0 - x3]], dtype=complex)


def hermitian_to_vector(X) -> np.ndarray:
    return np.array([
        0.5 * (X[0, 0] + X[1, 1]).real,
        X[0, 1].real,
        X[0, 1].imag,
        0.5 * (X[0, 0] - X[1, 1]).real,
    ])


def dist(p: MPoint, q: MPoint) -> float:
    """Hyperbolic distance arccosh(-<p,q>)"""
    c = -float(mink(p.x, q.x))
    if c < 1.0 - DIST_TOL:
        raise GeometryError(f"-<p,q> = {c} < 1: points are not on the hyperboloid")
    return float(np.arccosh(max(c, 1.0)))


def exp_map(v: TangentVec, t: float = 1.0) -> MPoint:
    """
    Point reached at time t by the geodesic with initial velocity v

    Raises:
        GeometryError: if v is the zero vector
    """
    speed = v.norm()
    if speed == 0.0:
        raise GeometryError("exponential map needs a nonzero direction")
    s = t * speed
    return MPoint.on_sheet(np.cosh(s) * v.base.x + np.sinh(s) * v.v / speed)


def geodesic_velocity(v: TangentVec, t: float) -> TangentVec:
    """Velocity at time t of the geodesic with initial velocity v"""
    speed = v.norm()
    if speed == 0.0:
        raise GeometryError("geodesic velocity needs a nonzero direction")
    s = t * speed
    point = exp_map(v, t)
    return TangentVec(point, speed * (np.sinh(s) * v.base.x + np.cosh(s) * v.v / speed))


def parallel_transport(w: TangentVec, gamma: HGeodesic, s: float) -> TangentVec:
    """Transport w from gamma(0) to gamma(s) along the geodesic"""
    if not np.allclose(w.base.x, gamma.p.x, rtol=0.0, atol=SHEET_TOL):
        raise GeometryError("vector to transport is not based at the geodesic start")
    along = mink(w.v, gamma.u.v)
    normal_part = w.v - along * gamma.u.v
    velocity = np.sinh(s) * gamma.p.x + np.cosh(s) * gamma.u.v
    return TangentVec.project(gamma.point(s), along * velocity + normal_part)


def plane_signed_distance(P: HPlane, p: MPoint) -> float:
    """Signed distance to the plane, negative inside the half-space"""
    return float(np.arcsinh(mink(p.x, P.n)))


def _oriented_frame(axis: HGeodesic) -> np.ndarray:
    """Columns (p, u, w1, w2): Lorentz frame with determinant +1 adapted to the axis"""
    p, u = axis.p.x, axis.u.v
    normals = minkowski_complement(np.vstack([p, u]))
    w1, w2 = normals[0], normals[1]
    w1 = w1 / np.sqrt(mink(w1, w1))
    w2 = w2 - mink(w2, w1) * w1
    w2 = w2 / np.sqrt(mink(w2, w2))
    frame = np.column_stack([p, u, w1, w2])
    if np.linalg.det(frame) < 0:
        frame[:, 3] = -frame[:, 3]
    return frame


def loxodromic(axis: HGeodesic, length: float, twist: float = 0.0) -> Isometry:
    """
    Translation by length along axis composed with rotation by twist about it

    Raises:
        GeometryError: if length is not positive
    """
    if length <= 0:
        raise GeometryError(f"loxodromic translation length must be positive, got {length}")
    frame = _oriented_frame(axis)
    standard = np.eye(4)
    standard[0, 0] = standard[1, 1] = np.cosh(length)
    standard[0, 1] = standard[1, 0] = np.sinh(length)
    standard[2, 2] = standard[3, 3] = np.cos(twist)
    standard[3, 2], standard[2, 3] = np.sin(twist), -np.sin(twist)
    return Isometry(frame @ standard @ ETA @ frame.T @ ETA)


def loxodromic_sl2c(axis: HGeodesic, length: float, twist: float = 0.0) -> np.ndarray:
    """SL(2,C) form of loxodromic() with trace 2 cosh((length + i twist) / 2)"""
    A = loxodromic(axis, length, twist).to_sl2c()
    target = 2.0 * np.cosh(0.5 * complex(length, twist))
    if abs(np.trace(-A) - target) < abs(np.trace(A) - target):
        A = -A
    return A
