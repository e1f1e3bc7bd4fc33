"""
Central finite-difference stencils and Richardson extrapolation

Every derivative used by the verification engines goes through these helpers so
that reports can quote the stencil (step, order) they were produced with.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# Central first-derivative weights by order of accuracy, offsets -k..k
_FIRST = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
}
# Central second-derivative weights
_SECOND = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}


@dataclass(frozen=True)
class Stencil:
    """Step and order of accuracy of a central difference"""
    h: float
    order: int = 2

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError(f"finite-difference step must be positive, got {self.h}")
        if self.order not in _FIRST:
            raise ValueError(f"unsupported stencil order {self.order}, use one of {sorted(_FIRST)}")

    def offsets(self) -> np.ndarray:
        k = len(_FIRST[self.order]) // 2
        return np.arange(-k, k + 1) * self.h

    def as_tuple(self) -> tuple:
        return (self.h, self.order)


def central_difference(func: Callable[[float], object], t: float, h: float, order: int = 2):
    """
    Central-difference derivative of func at t

    Args:
        func: scalar or array valued function of one real variable
        t: evaluation point
        h: step
        order: order of accuracy (2 or 4)

    Returns:
        Derivative estimate with the same shape as func(t)
    """
    stencil = Stencil(h, order)
    weights = _FIRST[order]
    total = None
    for w, offset in zip(weights, stencil.offsets()):
        if w == 0.0:
            continue
        term = w * np.asarray(func(t + offset))
        total = term if total is None else total + term
    return total / h


def partial_derivatives(chart: Callable[[float, float], np.ndarray], u: float, v: float, h: float):
    """
    Fourth-order first and second partial derivatives of a two-parameter map

    Returns:
        (c, c_u, c_v, c_uu, c_uv, c_vv)
    """
    w1 = _FIRST[4]
    w2 = _SECOND[4]
    offsets = np.arange(-2, 3)
    along_u = [np.asarray(chart(u + k * h, v)) for k in offsets]
    along_v = [np.asarray(chart(u, v + k * h)) for k in offsets]
    c = along_u[2]
    c_u = sum(w * x for w, x in zip(w1, along_u)) / h
    c_v = sum(w * x for w, x in zip(w1, along_v)) / h
    c_uu = sum(w * x for w, x in zip(w2, along_u)) / h ** 2
    c_vv = sum(w * x for w, x in zip(w2, along_v)) / h ** 2
    c_uv = np.zeros_like(c)
    for i, wi in zip(offsets, w1):
        if wi == 0.0:
            continue
        for j, wj in zip(offsets, w1):
            if wj == 0.0:
                continue
            c_uv = c_uv + wi * wj * np.asarray(chart(u + i * h, v + j * h))
    c_uv = c_uv / h ** 2
    return c, c_u, c_v, c_uu, c_uv, c_vv


def richardson_limit(steps: Sequence[float], values: Sequence[float], orders: Sequence[int]) -> float:
    """
    Extrapolate values sampled at geometrically shrinking steps to step zero

    Args:
        steps: sample steps, constant ratio, largest first
        values: function values at the steps
        orders: error exponents eliminated one per level, e.g. [1, 2, 3]

    Returns:
        Extrapolated limit
    """
    steps = np.asarray(steps, dtype=float)
    table = np.asarray(values, dtype=float)
    if len(steps) != len(table) or len(steps) < 2:
        raise ValueError("Richardson extrapolation needs at least two matching samples")
    if len(orders) > len(steps) - 1:
        raise ValueError(f"{len(steps)} samples cannot eliminate {len(orders)} error terms")
    ratios = steps[:-1] / steps[1:]
    if not np.allclose(ratios, ratios[0], rtol=1e-12):
        raise ValueError("Richardson extrapolation needs a constant step ratio")
    ratio = ratios[0]
    for p in orders:
        factor = ratio ** p
        table = (factor * table[1:] - table[:-1]) / (factor - 1.0)
        logger.debug(f"Richardson level p={p}: {table.tolist()}")
    return float(table[-1])
