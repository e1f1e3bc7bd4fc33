"""
Holonomy traces, geodesic lengths and their first variation

Lengths of closed geodesics are read off traces of SL(2,C) matrices: a
loxodromic A has complex length lambda with tr A = +-2 cosh(lambda / 2). Rational
measured laminations are weighted lists of cyclically reduced words in the
generators. Metric deformations carry an explicit Riemannian metric family on a
chart together with a g_0-geodesic, for the first variation of its length.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from modules.finite_difference import central_difference
from modules.quadrature import QuadratureError

logger = logging.getLogger(__name__)

DET_TOL = 1e-10
LOXODROMIC_TOL = 1e-12
GEODESIC_TOL = 1e-8
SMOOTHNESS_TOL = 1e-3
CHRISTOFFEL_STEP = 1e-3


class NonLoxodromicError(ValueError):
    """Raised when a word evaluates to an elliptic or parabolic element"""


class BranchCrossingError(ValueError):
    """Raised when the complex length jumps between branches inside a stencil"""


class RepresentationError(ValueError):
    """Raised for malformed generators, words or laminations"""


def sl2_inverse(A: np.ndarray) -> np.ndarray:
    return np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]], dtype=complex)


def _principal_length(trace: complex) -> complex:
    """2 arccosh(tr / 2) on the principal branch, real part >= 0"""
    return 2.0 * complex(np.arccosh(complex(trace) / 2.0))


def complex_length(A) -> complex:
    """
    Complex translation length of a loxodromic matrix

    Args:
        A: 2x2 complex matrix of unit determinant

    Returns:
        lambda with Re lambda > 0 and Im lambda in (-pi, pi]

    Raises:
        NonLoxodromicError: if Re lambda <= 1e-12
    """
    A = np.asarray(A, dtype=complex)
    lam = _principal_length(np.trace(A))
    if lam.real < 0:
        lam = -lam
    if lam.real <= LOXODROMIC_TOL:
        raise NonLoxodromicError(f"trace {np.trace(A):.6g} is not loxodromic")
    # Both trace signs give lambda modulo 2 pi i
    im = math.remainder(lam.imag, 2.0 * math.pi)
    if im <= -math.pi:
        im += 2.0 * math.pi
    return complex(lam.real, im)


def real_length(A) -> float:
    return complex_length(A).real


@dataclass(frozen=True, eq=False)
class Rep:
    """Images of the free generators a, b, c, ... in SL(2,C)"""
    generators: Tuple[np.ndarray, ...]

    def __post_init__(self):
        gens = []
        for k, g in enumerate(self.generators):
            arr = np.array(g, dtype=complex)
            if arr.shape != (2, 2):
                raise RepresentationError(f"generator {k} is not a 2x2 matrix")
            if abs(np.linalg.det(arr) - 1.0) > DET_TOL:
                raise RepresentationError(f"generator {k} has determinant {np.linalg.det(arr):.6g}, expected 1")
            arr.setflags(write=False)
            gens.append(arr)
        if not gens:
            raise RepresentationError("a representation needs at least one generator")
        object.__setattr__(self, "generators", tuple(gens))

    def letter(self, symbol: str) -> np.ndarray:
        index = ord(symbol.lower()) - ord("a")
        if not 0 <= index < len(self.generators):
            raise RepresentationError(f"letter {symbol!r} has no generator")
        g = self.generators[index]
        return sl2_inverse(g) if symbol.isupper() else g


def parse_word(word: str) -> str:
    """Strip whitespace; lowercase letters are generators, uppercase their inverses"""
    letters = "".join(word.split())
    if not letters:
        raise RepresentationError("empty word")
    if not letters.isalpha() or not letters.isascii():
        raise RepresentationError(f"word {word!r} contains characters other than letters")
    return letters


def _cancels(x: str, y: str) -> bool:
    return x != y and x.lower() == y.lower()


def is_cyclically_reduced(word: str) -> bool:
    letters = parse_word(word)
    if any(_cancels(x, y) for x, y in zip(letters, letters[1:])):
        return False
    return len(letters) == 1 or not _cancels(letters[0], letters[-1])


def word_matrix(rho: Rep, word: str) -> np.ndarray:
    result = np.eye(2, dtype=complex)
    for symbol in parse_word(word):
        result = result @ rho.letter(symbol)
    return result


def word_length(rho: Rep, word: str) -> float:
    return real_length(word_matrix(rho, word))


@dataclass(frozen=True)
class Curve:
    word: str
    weight: float


@dataclass(frozen=True)
class RationalLamination:
    """Weighted multicurve sum u_i delta_{d_i}"""
    curves: Tuple[Curve, ...]

    def __post_init__(self):
        curves = tuple(c if isinstance(c, Curve) else Curve(*c) for c in self.curves)
        for i, c in enumerate(curves):
            if not c.weight > 0:
                raise RepresentationError(f"curve {i} has non-positive weight {c.weight}")
            if not is_cyclically_reduced(c.word):
                raise RepresentationError(f"curve {i} word {c.word!r} is not cyclically reduced")
        object.__setattr__(self, "curves", curves)

    def union(self, other: "RationalLamination") -> "RationalLamination":
        return RationalLamination(self.curves + other.curves)

    def scaled(self, factor: float) -> "RationalLamination":
        return RationalLamination(tuple(Curve(c.word, factor * c.weight) for c in self.curves))


def lamination_length(rho: Rep, alpha: RationalLamination) -> float:
    """
    Sum of u_i times the real length of word_i

    Raises:
        NonLoxodromicError: naming the index of the first non-loxodromic curve
    """
    terms = []
    for i, c in enumerate(alpha.curves):
        try:
            terms.append(c.weight * word_length(rho, c.word))
        except NonLoxodromicError as e:
            raise NonLoxodromicError(f"curve {i} ({c.word}): {e}")
    return math.fsum(terms)


def lipschitz_bound(rho: Rep, alpha: RationalLamination, beta: RationalLamination) -> float:
    """Sum |u_i - v_i| times the largest curve length, for laminations on the same words"""
    if [c.word for c in alpha.curves] != [c.word for c in beta.curves]:
        raise RepresentationError("Lipschitz bound needs the same words in the same order")
    longest = max(word_length(rho, c.word) for c in alpha.curves)
    return math.fsum(abs(a.weight - b.weight) for a, b in zip(alpha.curves, beta.curves)) * longest


@dataclass(frozen=True, eq=False)
class RepPath:
    """Smooth path t -> Rep on a closed interval"""
    name: str
    fn: Callable[[float], Rep]
    domain: Tuple[float, float]

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise RepresentationError(f"path {self.name} has an empty domain {self.domain}")
        self._check_smoothness()

    def at(self, t: float) -> Rep:
        lo, hi = self.domain
        if not lo - 1e-15 <= t <= hi + 1e-15:
            raise ValueError(f"t={t} outside domain {self.domain} of path {self.name}")
        return self.fn(t)

    def generator_derivatives(self, t: float, h: float) -> List[np.ndarray]:
        """Fourth-order central differences of the generator matrices"""
        stacked = central_difference(lambda s: np.array(self.fn(s).generators), t, h, order=4)
        return list(stacked)

    def _check_smoothness(self, samples: int = 5, h: float = 1e-3):
        """Second differences at h and h/2 must agree where the entries are C^2"""
        lo, hi = self.domain
        margin = 2 * h
        for t in np.linspace(lo + margin, hi - margin, samples):
            def second(step):
                values = [np.array(self.fn(t + k * step).generators) for k in (-1, 0, 1)]
                return (values[0] - 2 * values[1] + values[2]) / step ** 2
            coarse, fine = second(h), second(0.5 * h)
            scale = 1.0 + float(np.abs(fine).max())
            if not np.all(np.isfinite(fine)) or float(np.abs(coarse - fine).max()) > SMOOTHNESS_TOL * scale:
                raise RepresentationError(f"path {self.name} is not C^2 near t={t:.6g}")


@dataclass(frozen=True)
class LengthDerivative:
    fd: float
    analytic: float
    residual: float


def _trace_derivative(rho: Rep, d_gens: Sequence[np.ndarray], word: str) -> complex:
    """Product rule on the word, with d(g^-1) = -g^-1 dg g^-1"""
    letters = parse_word(word)
    factors = [rho.letter(s) for s in letters]
    derivs = []
    for s, g in zip(letters, factors):
        dg = d_gens[ord(s.lower()) - ord("a")]
        derivs.append(-g @ dg @ g if s.isupper() else dg)
    total = 0.0 + 0.0j
    for j in range(len(factors)):
        product = np.eye(2, dtype=complex)
        for k, g in enumerate(factors):
            product = product @ (derivs[k] if k == j else g)
        total += np.trace(product)
    return total


def length_derivative(P: RepPath, alpha: RationalLamination, t: float, h: float) -> LengthDerivative:
    """
    Derivative of lamination length along a representation path, two ways

    fd is the central difference of lamination_length; analytic differentiates
    2 arccosh(tr / 2) through the complex branch with trace derivatives from the
    product rule.

    Raises:
        BranchCrossingError: if the complex length of a curve jumps inside [t - h, t + h]
        NonLoxodromicError: if a curve stops being loxodromic inside the stencil
    """
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    lo, hi = P.domain
    if t - 2 * h < lo or t + 2 * h > hi:
        raise ValueError(f"stencil around t={t} leaves domain {P.domain} of path {P.name}")

    reps = {s: P.at(s) for s in (t - h, t, t + h)}
    for i, c in enumerate(alpha.curves):
        lengths = [complex_length(word_matrix(reps[s], c.word)) for s in (t - h, t, t + h)]
        jumps = [abs(b.imag - a.imag) for a, b in zip(lengths, lengths[1:])]
        if max(jumps) > math.pi:
            raise BranchCrossingError(f"curve {i} ({c.word}) crosses a branch of its complex length near t={t}")

    fd = (lamination_length(reps[t + h], alpha) - lamination_length(reps[t - h], alpha)) / (2.0 * h)

    rho = reps[t]
    d_gens = P.generator_derivatives(t, h)
    terms = []
    for c in alpha.curves:
        tr = np.trace(word_matrix(rho, c.word))
        lam = _principal_length(tr)
        d_lam = _trace_derivative(rho, d_gens, c.word) / cmath.sinh(0.5 * lam)
        terms.append(c.weight * d_lam.real)
    analytic = math.fsum(terms)
    logger.debug(f"length derivative {P.name} t={t} h={h}: fd={fd:.12g} analytic={analytic:.12g}")
    return LengthDerivative(fd, analytic, abs(fd - analytic))


# Metric deformations on a chart

MetricField = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True, eq=False)
class MetricDeformation:
    """
    Metric family g_t on a chart, its derivative at t = 0 and a g_0-geodesic

    curve, velocity and acceleration are closed-form functions of the curve
    parameter on [domain[0], domain[1]].
    """
    name: str
    metric: MetricField
    metric_dot: Callable[[np.ndarray], np.ndarray]
    curve: Callable[[float], np.ndarray]
    velocity: Callable[[float], np.ndarray]
    acceleration: Callable[[float], np.ndarray]
    domain: Tuple[float, float]
    sites: int = 5

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"deformation {self.name} has an empty curve domain")
        for s in np.linspace(lo, hi, self.sites):
            g = self.metric(self.curve(s), 0.0)
            if np.linalg.eigvalsh(0.5 * (g + g.T)).min() <= 0:
                raise ValueError(f"metric of {self.name} is not positive definite at s={s:.6g}")
            residual = self.geodesic_residual(float(s))
            if residual > GEODESIC_TOL:
                raise ValueError(f"curve of {self.name} is not a g_0-geodesic at s={s:.6g} (residual {residual:.3e})")

    def christoffel(self, x: np.ndarray) -> np.ndarray:
        """Christoffel symbols Gamma[k, i, j] of g_0 from fourth-order differences"""
        x = np.asarray(x, dtype=float)
        n = len(x)
        dg = np.empty((n, n, n))
        for l in range(n):
            step = np.zeros(n)
            step[l] = 1.0
            dg[l] = central_difference(lambda s: self.metric(x + s * step, 0.0), 0.0, CHRISTOFFEL_STEP, order=4)
        g_inv = np.linalg.inv(self.metric(x, 0.0))
        # dg[l, i, j] = d_l g_ij
        lowered = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
        return np.einsum("kl,lij->kij", g_inv, lowered)

    def geodesic_residual(self, s: float) -> float:
        x, v, a = self.curve(s), self.velocity(s), self.acceleration(s)
        return float(np.abs(a + np.einsum("kij,i,j->k", self.christoffel(x), v, v)).max())


def _quad(func, lo: float, hi: float, what: str) -> float:
    value, error = quad(func, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
    if error > 1e-9:
        raise QuadratureError(f"{what} quadrature error estimate {error:.3e} exceeds 1e-9")
    return value


def first_variation_integral(D: MetricDeformation) -> float:
    """Integral of g_dot(c', c') / (2 g_0(c', c')) against g_0 arclength along the curve"""
    def integrand(s):
        x, v = D.curve(s), D.velocity(s)
        g = float(v @ D.metric(x, 0.0) @ v)
        g_dot = float(v @ D.metric_dot(x) @ v)
        return g_dot / (2.0 * g) * math.sqrt(g)

    return _quad(integrand, *D.domain, what=f"first variation of {D.name}")


def curve_length(D: MetricDeformation, t: float) -> float:
    """Length of the fixed curve in the metric g_t"""
    def speed(s):
        v = D.velocity(s)
        return math.sqrt(float(v @ D.metric(D.curve(s), t) @ v))

    return _quad(speed, *D.domain, what=f"length of {D.name} at t={t}")
