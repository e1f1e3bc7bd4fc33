"""
Finitely bent chains of half-spaces

A chain is a sequence of half-spaces H_0..H_m whose planes are all orthogonal
to a common base plane. Consecutive planes meet along bending lines orthogonal
to the base plane, so the boundary of the intersection is a convex pleated
surface whose cross-section is a convex polygonal arc. The window of a chain is
the strip |s| <= l/2 along every bending line together with the face patches
between consecutive lines (and end patches of fixed width).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np

from modules.minkowski_core import MPoint, TangentVec, dist, mink, minkowski_complement
from modules.quadrature import tensor_gauss_legendre
from modules.tubes import (
    FundamentalForms, LineFrame, PlaneFrame, embedded_forms,
)

logger = logging.getLogger(__name__)

CHAIN_TOL = 1e-9
NULL_ANGLE = 1e-10


class ChainError(ValueError):
    """Raised for chains or splits that are not locally convex"""


def _unit(x: np.ndarray) -> np.ndarray:
    return x / math.sqrt(mink(x, x))


def _tangent_along(point: np.ndarray, normal: np.ndarray, base_normal: np.ndarray) -> np.ndarray:
    """Unit tangent at point to the base-plane trace of the plane with this normal"""
    direction = minkowski_complement(np.vstack([point, normal, base_normal]))[0]
    return _unit(direction)


def _circle_direction(center: MPoint, phi: float) -> np.ndarray:
    """Unit tangent at a base-plane point with polar angle phi in a fixed frame"""
    c = center.x
    m = np.eye(4)[3]
    if abs(mink(c, m)) > 1e-12:
        raise ChainError("circle centre must lie in the base plane x3 = 0")
    f1 = _unit(TangentVec.project(center, np.eye(4)[1]).v)
    f2 = _tangent_along(c, f1, m)
    return math.cos(phi) * f1 + math.sin(phi) * f2


def circle_tangent_normal(center: MPoint, radius: float, phi: float) -> np.ndarray:
    """Outward normal of the plane orthogonal to x3 = 0 touching the circle at polar angle phi"""
    if radius <= 0:
        raise ChainError(f"circle radius must be positive, got {radius}")
    return math.sinh(radius) * center.x + math.cosh(radius) * _circle_direction(center, phi)


def circle_point(center: MPoint, distance: float, phi: float) -> np.ndarray:
    """Base-plane point at the given distance from center in polar direction phi"""
    return math.cosh(distance) * center.x + math.sinh(distance) * _circle_direction(center, phi)


@dataclass(frozen=True)
class ChainSplit:
    """New plane turning by theta_first from H_index, meeting it offset behind the bending line"""
    theta_first: float
    offset: float = 0.0


@dataclass(frozen=True, eq=False)
class BentChain:
    """
    Ordered half-spaces {<x, n_i> <= 0} whose normals are orthogonal to base_normal

    Attributes derived on construction: corners p_i (bending line i meets the base
    plane there) and exterior angles theta_i between H_i and H_{i+1}.
    """
    normals: Tuple[np.ndarray, ...]
    base_normal: np.ndarray = field(default_factory=lambda: np.eye(4)[3])
    segment_length: float = 1.0
    end_width: float = 0.5
    corners: Tuple[np.ndarray, ...] = field(init=False)
    angles: Tuple[float, ...] = field(init=False)

    def __post_init__(self):
        normals = tuple(np.array(n, dtype=float) for n in self.normals)
        m = np.array(self.base_normal, dtype=float)
        if len(normals) < 2:
            raise ChainError("a chain needs at least two half-spaces")
        if self.segment_length <= 0 or self.end_width <= 0:
            raise ChainError("window segment length and end width must be positive")
        for k, n in enumerate(normals):
            if abs(mink(n, n) - 1.0) > 1e-10:
                raise ChainError(f"normal {k} is not a unit spacelike vector")
            if abs(mink(n, m)) > 1e-10:
                raise ChainError(f"plane {k} is not orthogonal to the base plane")

        corners, angles = [], []
        for i in range(len(normals) - 1):
            c = mink(normals[i], normals[i + 1])
            if not -1.0 < c < 1.0:
                raise ChainError(f"planes {i} and {i + 1} do not intersect in H^3")
            theta = math.acos(c)
            if not 0.0 < theta < math.pi:
                raise ChainError(f"bending angle {theta} at line {i} is outside (0, pi)")
            line = minkowski_complement(np.vstack([normals[i], normals[i + 1], m]))[0]
            if mink(line, line) >= 0:
                raise ChainError(f"planes {i} and {i + 1} meet outside the base plane")
            line = line / math.sqrt(-mink(line, line))
            corners.append(line if line[0] > 0 else -line)
            angles.append(theta)

        for j, p in enumerate(corners):
            for k, n in enumerate(normals):
                if mink(p, n) > CHAIN_TOL * p[0]:
                    raise ChainError(f"bending line {j} lies outside half-space {k}: chain is not convex")

        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "base_normal", m)
        object.__setattr__(self, "corners", tuple(corners))
        object.__setattr__(self, "angles", tuple(angles))

    @classmethod
    def tangent_to_circle(cls, center: MPoint, radius: float, directions: Sequence[float],
                          segment_length: float = 1.0, end_width: float = 0.5) -> "BentChain":
        """
        Chain of planes tangent to the circle of given radius about a base-plane point

        The base plane is x3 = 0 and center must lie on it; directions are polar
        angles of the tangency points, increasing.
        """
        normals = [circle_tangent_normal(center, radius, phi) for phi in directions]
        return cls(tuple(normals), np.eye(4)[3], segment_length, end_width)

    @property
    def line_count(self) -> int:
        return len(self.angles)

    def forward_tangent(self, i: int) -> np.ndarray:
        """Tangent at corner i along the trace of H_i, pointing out of H_{i+1}"""
        tau = _tangent_along(self.corners[i], self.normals[i], self.base_normal)
        return tau if mink(tau, self.normals[i + 1]) > 0 else -tau

    def outgoing_tangent(self, i: int) -> np.ndarray:
        """Tangent at corner i along the trace of H_{i+1}, pointing into H_i"""
        tau = _tangent_along(self.corners[i], self.normals[i + 1], self.base_normal)
        return tau if mink(tau, self.normals[i]) < 0 else -tau

    def face_widths(self) -> List[float]:
        widths = [self.end_width]
        for i in range(1, self.line_count):
            widths.append(dist(MPoint.on_sheet(self.corners[i - 1]), MPoint.on_sheet(self.corners[i])))
        widths.append(self.end_width)
        return widths

    def face_areas(self) -> List[float]:
        """Areas of the face patches of the window"""
        strip = 2.0 * math.sinh(0.5 * self.segment_length)
        return [w * strip for w in self.face_widths()]

    def transverse_bending(self) -> float:
        return math.fsum(self.angles)

    def window_bending(self) -> float:
        """Bending measure of the window: sum of theta_i times the segment length"""
        return self.segment_length * self.transverse_bending()

    def face_frames(self) -> List[PlaneFrame]:
        """Fermi frames of the face patches: start point, forward trace tangent, base normal, face normal"""
        m = self.base_normal
        frames = []
        p0, tau0, w = self.corners[0], self.forward_tangent(0), self.end_width
        start = math.cosh(w) * p0 - math.sinh(w) * tau0
        forward = -math.sinh(w) * p0 + math.cosh(w) * tau0
        frames.append(PlaneFrame(start, forward, m, self.normals[0]))
        for j in range(1, len(self.normals)):
            frames.append(PlaneFrame(self.corners[j - 1], self.outgoing_tangent(j - 1), m, self.normals[j]))
        return frames

    def line_frames(self) -> List[LineFrame]:
        """Bending lines with radial frames starting at n_i and turning towards n_{i+1}"""
        return [
            LineFrame(self.corners[i], self.base_normal, self.normals[i], self.forward_tangent(i))
            for i in range(self.line_count)
        ]

    def with_normals(self, normals: Sequence[np.ndarray]) -> "BentChain":
        return BentChain(tuple(normals), self.base_normal, self.segment_length, self.end_width)


def split_for_plane(chain: BentChain, index: int, normal: np.ndarray) -> ChainSplit:
    """Split parameters that insert the plane with the given normal after H_index"""
    p, tau = chain.corners[index], chain.forward_tangent(index)
    a, b = mink(p, normal), mink(tau, normal)
    if abs(a) >= abs(b):
        raise ChainError("new plane does not cross the trace of the split face")
    offset = math.atanh(a / b)
    theta = math.acos(max(-1.0, min(1.0, mink(chain.normals[index], normal))))
    return ChainSplit(theta, offset)


def refine(chain: BentChain, index: int, split: ChainSplit) -> BentChain:
    """
    Insert a half-space between H_index and H_{index+1}

    The new plane meets the trace of H_index at distance split.offset behind
    bending line index and turns by split.theta_first. A zero offset rotates about
    the bending line itself, so the two new angles add up to the old one.

    Raises:
        ChainError: if the refined chain is not locally convex
    """
    if not 0 <= index < chain.line_count:
        raise ChainError(f"bending line {index} does not exist")
    if split.theta_first <= 0:
        raise ChainError(f"split angle must be positive, got {split.theta_first}")
    if split.offset < 0:
        raise ChainError(f"split offset must be non-negative, got {split.offset}")
    p, tau = chain.corners[index], chain.forward_tangent(index)
    d = split.offset
    tangent = -math.sinh(d) * p + math.cosh(d) * tau
    normal = math.cos(split.theta_first) * chain.normals[index] + math.sin(split.theta_first) * tangent

    gap = normal - chain.normals[index + 1]
    if 2.0 * math.asin(min(1.0, 0.5 * math.sqrt(max(mink(gap, gap), 0.0)))) <= NULL_ANGLE:
        logger.debug(f"split at line {index} adds a null line; chain unchanged")
        return chain
    normals = list(chain.normals)
    normals.insert(index + 1, normal)
    try:
        refined = chain.with_normals(normals)
    except ChainError as e:
        raise ChainError(f"split at line {index} is not convex: {e}")
    logger.debug(f"refined line {index}: angles {refined.angles[index]:.6g}, {refined.angles[index + 1]:.6g}")
    return refined


def pencil_split(chain: BentChain, index: int, pieces: int) -> BentChain:
    """Split bending line index into equal angles by planes through the line itself"""
    refined = chain
    for k in range(pieces - 1):
        theta = chain.angles[index] / pieces
        refined = refine(refined, index + k, ChainSplit(theta, 0.0))
    return refined


def refine_to_circle(chain: BentChain, center: MPoint, radius: float,
                     directions: Sequence[float]) -> Tuple[BentChain, List[float]]:
    """
    Insert the tangent plane at every mid-angle of a chain tangent to a circle

    Returns:
        (refined chain, its tangency directions)
    """
    directions = list(directions)
    if len(directions) != len(chain.normals):
        raise ChainError("one tangency direction per half-space is required")
    refined = chain
    for i in reversed(range(chain.line_count)):
        phi = 0.5 * (directions[i] + directions[i + 1])
        normal = circle_tangent_normal(center, radius, phi)
        refined = refine(refined, i, split_for_plane(refined, i, normal))
        directions.insert(i + 1, phi)
    return refined, directions


# Window surfaces


def window_forms(chain: BentChain, eps: float, samples: int = 3) -> List[FundamentalForms]:
    """Numerical forms of the eps-surface sampled on every face patch and bending segment"""
    forms = []
    half = 0.5 * chain.segment_length
    for frame, width in zip(chain.face_frames(), chain.face_widths()):
        if width == 0.0:
            continue
        chart = frame.tube_chart(eps)
        for a in np.linspace(0.0, width, samples):
            for s in np.linspace(-half, half, samples):
                forms.append(embedded_forms(chart, a, s, lambda x, y, f=frame: f.tube_normal(eps, x, y)))
    for frame, theta in zip(chain.line_frames(), chain.angles):
        chart = frame.tube_chart(eps)
        for s in np.linspace(-half, half, samples):
            for th in np.linspace(0.0, theta, samples):
                forms.append(embedded_forms(chart, s, th, lambda x, y, f=frame: f.tube_normal(eps, x, y)))
    return forms


def window_mean_curvature_quadrature(chain: BentChain, eps: float, nodes: int = 6) -> float:
    """Gauss-Legendre integral of H da over the eps-surface of the window from numerical forms"""
    total = []
    half = 0.5 * chain.segment_length
    pieces = [(f, w, (0.0, w), (-half, half)) for f, w in zip(chain.face_frames(), chain.face_widths())]
    pieces += [(f, th, (-half, half), (0.0, th)) for f, th in zip(chain.line_frames(), chain.angles)]
    for frame, extent, first, second in pieces:
        if extent == 0.0:
            continue
        chart = frame.tube_chart(eps)
        points, weights = tensor_gauss_legendre([first, second], nodes)
        for (x, y), w in zip(points, weights):
            forms = embedded_forms(chart, x, y, lambda a, b, f=frame: f.tube_normal(eps, a, b))
            total.append(w * forms.H * forms.area_element())
    return math.fsum(total)


# Distance fields in the base plane


def body_distance(chain: BentChain, x: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Distance from a base-plane point to the chain body and the nearest body point

    Points inside the body return the largest (negative) signed plane distance
    and themselves as nearest point.
    """
    signed = [mink(x, n) for n in chain.normals]
    if max(signed) <= 0:
        return float(np.arcsinh(max(signed))), x
    best, nearest = math.inf, None
    for k, n in enumerate(chain.normals):
        if signed[k] <= 0:
            continue
        foot = (x - signed[k] * n) / math.sqrt(1.0 + signed[k] ** 2)
        if all(mink(foot, other) <= CHAIN_TOL * foot[0] for j, other in enumerate(chain.normals) if j != k):
            d = float(np.arcsinh(signed[k]))
            if d < best:
                best, nearest = d, foot
    for p in chain.corners:
        d = float(np.arccosh(max(1.0, -mink(x, p))))
        if d < best:
            best, nearest = d, p
    return best, nearest


def distance_gradient(x: np.ndarray, nearest: np.ndarray) -> np.ndarray:
    """Unit tangent at x pointing away from the nearest point"""
    towards = nearest + mink(nearest, x) * x
    return -_unit(towards)


def gradient_deviation(chain: BentChain, target: Callable[[np.ndarray], np.ndarray],
                       sites: Sequence[np.ndarray]) -> float:
    """Largest Minkowski norm of the difference between chain and target distance gradients"""
    worst = 0.0
    for x in sites:
        _, nearest = body_distance(chain, x)
        diff = distance_gradient(x, nearest) - target(x)
        worst = max(worst, math.sqrt(max(mink(diff, diff), 0.0)))
    return worst
