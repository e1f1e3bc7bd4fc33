"""
Simplex and tensor-product quadrature

Grundmann-Moeller rules on tetrahedra drive an adaptive integrator whose final
subdivision is recorded as a QuadraturePattern in barycentric coordinates of the
starting tetrahedra. Reusing a pattern on a nearby decomposition with the same
structure makes the quadrature error a smooth function of the deformation
parameter, which finite differences of volumes rely on.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

logger = logging.getLogger(__name__)

LOW_ORDER = 4
HIGH_ORDER = 5
MAX_CELLS = 400_000
MAX_LEVELS = 14


class QuadratureError(ValueError):
    """Raised when adaptive quadrature cannot meet its tolerance within budget"""


@lru_cache(maxsize=None)
def grundmann_moeller_rule(s: int, dim: int = 3) -> Tuple[np.ndarray, np.ndarray]:
    """
    Grundmann-Moeller rule of degree 2s+1 on the dim-simplex

    Returns:
        (barycentric nodes of shape (Q, dim+1), weights of shape (Q,) summing to 1)
    """
    d = 2 * s + 1
    weights = {}
    for i in range(s + 1):
        w = (-1) ** i * Fraction(d + dim - 2 * i) ** d
        w /= 2 ** (2 * s) * math.factorial(i) * math.factorial(d + dim - i)
        denominator = d + dim - 2 * i
        for beta in _compositions(s - i, dim + 1):
            point = tuple(Fraction(2 * b + 1, denominator) for b in beta)
            weights[point] = weights.get(point, 0) + w
    points = sorted(weights)
    nodes = np.array([[float(c) for c in p] for p in points])
    values = np.array([float(weights[p] * math.factorial(dim)) for p in points])
    nodes.setflags(write=False)
    values.setflags(write=False)
    return nodes, values


def _compositions(total: int, parts: int):
    """All tuples of nonnegative integers of the given length summing to total"""
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        bounds = (-1,) + cuts + (total + parts - 1,)
        yield tuple(bounds[k + 1] - bounds[k] - 1 for k in range(parts))


# Edge-midpoint refinement of a tetrahedron into eight children of equal volume
_MIDPOINT_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_CHILDREN = [
    ("v0", "m01", "m02", "m03"),
    ("m01", "v1", "m12", "m13"),
    ("m02", "m12", "v2", "m23"),
    ("m03", "m13", "m23", "v3"),
    ("m01", "m02", "m03", "m13"),
    ("m01", "m02", "m12", "m13"),
    ("m02", "m03", "m13", "m23"),
    ("m02", "m12", "m13", "m23"),
]


def _split(bary: np.ndarray) -> np.ndarray:
    """Children of a batch of tetrahedra given as (K, 4, 4) barycentric vertex rows"""
    points = {f"v{k}": bary[:, k, :] for k in range(4)}
    for a, b in _MIDPOINT_PAIRS:
        points[f"m{a}{b}"] = 0.5 * (bary[:, a, :] + bary[:, b, :])
    children = [np.stack([points[name] for name in child], axis=1) for child in _CHILDREN]
    return np.stack(children, axis=1).reshape(-1, 4, 4)


def tetra_volumes(vertices: np.ndarray) -> np.ndarray:
    """Euclidean volumes of a batch of tetrahedra of shape (K, 4, 3)"""
    edges = vertices[:, 1:, :] - vertices[:, :1, :]
    return np.abs(np.linalg.det(edges)) / 6.0


@dataclass(frozen=True, eq=False)
class QuadraturePattern:
    """Accepted cells of an adaptive run: parent tetrahedron index and barycentric vertices"""
    parent: np.ndarray
    bary: np.ndarray

    def __len__(self) -> int:
        return len(self.parent)


def _rule_sums(func, cells: np.ndarray, s: int) -> np.ndarray:
    nodes, weights = grundmann_moeller_rule(s)
    points = np.einsum("qa,kab->kqb", nodes, cells)
    return func(points) @ weights


def _evaluate(func, cells: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    volumes = tetra_volumes(cells)
    high = volumes * _rule_sums(func, cells, HIGH_ORDER)
    low = volumes * _rule_sums(func, cells, LOW_ORDER)
    return high, np.abs(high - low)


def integrate_tetrahedra(func: Callable[[np.ndarray], np.ndarray], tetrahedra: np.ndarray,
                         tol: float, max_cells: int = MAX_CELLS) -> Tuple[float, QuadraturePattern]:
    """
    Adaptive integral of func over a union of tetrahedra

    Args:
        func: vectorized integrand, maps points of shape (..., 3) to values of shape (...)
        tetrahedra: array of shape (M, 4, 3)
        tol: absolute error target for the whole union
        max_cells: subdivision budget

    Returns:
        (integral, pattern of accepted cells)

    Raises:
        QuadratureError: if the budget is exhausted before the estimate meets tol
    """
    tetrahedra = np.asarray(tetrahedra, dtype=float)
    total_volume = float(tetra_volumes(tetrahedra).sum())
    if total_volume <= 0.0:
        raise QuadratureError("integration domain has zero volume")

    parent = np.arange(len(tetrahedra))
    bary = np.broadcast_to(np.eye(4), (len(tetrahedra), 4, 4)).copy()
    accepted_parent, accepted_bary, accepted_values = [], [], []
    n_accepted = 0

    for level in range(MAX_LEVELS + 1):
        cells = bary @ tetrahedra[parent]
        values, errors = _evaluate(func, cells)
        allowance = tol * tetra_volumes(cells) / total_volume
        done = errors <= allowance
        accepted_parent.append(parent[done])
        accepted_bary.append(bary[done])
        accepted_values.append(values[done])
        n_accepted += int(done.sum())
        logger.debug(f"quadrature level {level}: {int(done.sum())} accepted, {int((~done).sum())} refined")
        if done.all():
            break
        parent = np.repeat(parent[~done], 8)
        bary = _split(bary[~done])
        if n_accepted + len(parent) > max_cells:
            raise QuadratureError(
                f"quadrature budget of {max_cells} cells exhausted at tol={tol:g}"
            )
    else:
        raise QuadratureError(f"quadrature did not converge within {MAX_LEVELS} levels at tol={tol:g}")

    pattern = QuadraturePattern(np.concatenate(accepted_parent), np.concatenate(accepted_bary))
    return math.fsum(np.concatenate(accepted_values)), pattern


def integrate_with_pattern(func: Callable[[np.ndarray], np.ndarray], tetrahedra: np.ndarray,
                           pattern: QuadraturePattern) -> float:
    """Integral of func with a fixed subdivision, summed in pattern order"""
    tetrahedra = np.asarray(tetrahedra, dtype=float)
    if pattern.parent.max(initial=-1) >= len(tetrahedra):
        raise QuadratureError("quadrature pattern refers to more tetrahedra than supplied")
    cells = pattern.bary @ tetrahedra[pattern.parent]
    values = tetra_volumes(cells) * _rule_sums(func, cells, HIGH_ORDER)
    return math.fsum(values)


def gauss_legendre(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]"""
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def tensor_gauss_legendre(bounds: Sequence[Tuple[float, float]], n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tensor-product Gauss-Legendre rule on a box

    Returns:
        (nodes of shape (n**dim, dim), weights of shape (n**dim,))
    """
    rules = [gauss_legendre(a, b, n) for a, b in bounds]
    grids = np.meshgrid(*[x for x, _ in rules], indexing="ij")
    weight_grids = np.meshgrid(*[w for _, w in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in weight_grids], axis=1), axis=1)
    return nodes, weights
