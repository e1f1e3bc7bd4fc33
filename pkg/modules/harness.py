"""
Verification suites and machine-readable reports

Each suite expands into independent check tasks run on a thread pool capped by
the configured thread count. Rows are sorted by check id, so reports do not
depend on completion order; with a fixed seed two runs give byte-identical JSON.
"""
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad, tplquad
from scipy.linalg import expm

from models.validation import SuiteConfigModel
from modules import bent_chain, fixtures, laminations, tubes, variation
from modules.minkowski_core import MPoint
from modules.polyhedra import ConvexPolyhedron, PolyhedronFamily, edge_data_derivative, hull, volume
from modules.quadrature import tensor_gauss_legendre

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["suite", "check", "anchor", "lhs", "rhs", "residual", "tolerance", "pass"]
SUITE_NAMES = (
    "schlafli", "dual-schlafli", "tubes", "core-expansion", "lengths", "margins",
    "smooth", "monotonicity", "epsilon-limit",
)


class UnknownSuiteError(ValueError):
    """Raised for suite names outside SUITE_NAMES and 'all'"""


@dataclass(frozen=True)
class ReportRow:
    suite: str
    check: str
    anchor: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    @classmethod
    def compare(cls, suite: str, check: str, anchor: str, lhs: float, rhs: float,
                tolerance: float) -> "ReportRow":
        return cls(suite, check, anchor, float(lhs), float(rhs), abs(float(lhs) - float(rhs)), tolerance)

    @classmethod
    def bound(cls, suite: str, check: str, anchor: str, lhs: float, rhs: float,
              tolerance: float) -> "ReportRow":
        """Row for the inequality lhs <= rhs; the residual is the violation, NaN if either side is not finite"""
        lhs, rhs = float(lhs), float(rhs)
        residual = max(0.0, lhs - rhs) if math.isfinite(lhs) and math.isfinite(rhs) else math.nan
        return cls(suite, check, anchor, lhs, rhs, residual, tolerance)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "check": self.check,
            "anchor": self.anchor,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class SuiteReport:
    suite: str
    rows: List[ReportRow]
    wall_time: float = 0.0
    config: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def failing(self) -> List[str]:
        return [row.check for row in self.rows if not row.passed]


@dataclass
class SuiteInputs:
    """User-supplied fixtures appended to the built-in ones"""
    families: List[PolyhedronFamily] = field(default_factory=list)
    polyhedra: List[ConvexPolyhedron] = field(default_factory=list)
    paths: List[Tuple[laminations.RepPath, laminations.RationalLamination]] = field(default_factory=list)


Task = Callable[[], List[ReportRow]]


def schlafli_tolerance(h: float) -> float:
    """1e-6 at the default step, growing with the O(h^2) truncation of looser stencils"""
    return max(1e-6, 1e2 * h * h)


def _families(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[PolyhedronFamily]:
    return [fixtures.polyhedron_family(name) for name in cfg.families] + list(inputs.families)


def _polyhedra(inputs: SuiteInputs) -> List[Tuple[str, ConvexPolyhedron]]:
    named = [("tetra", fixtures.base_tetrahedron()), ("bipyramid", fixtures.base_bipyramid())]
    named += [(f"input{k}", P) for k, P in enumerate(inputs.polyhedra)]
    return named


def _t_label(t: float) -> str:
    return f"t={t:+.4f}"


# Polyhedral suites


def schlafli_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite, h, tol = "schlafli", cfg.fd_step, schlafli_tolerance(cfg.fd_step)
    anchor = "dVol = 1/2 sum l dtheta"
    tasks = []
    for F in _families(cfg, inputs):
        for t in cfg.t_grid:
            def task(F=F, t=t):
                r = variation.schlafli_check(F, t, h, cfg.quadrature_tol)
                return [ReportRow.compare(suite, f"{suite}.{F.name}.{_t_label(t)}", anchor, r.lhs, r.rhs, tol)]
            tasks.append(task)

    def scaling():
        F = fixtures.polyhedron_family("stretch-tetra-v1")
        coarse = variation.schlafli_check(F, 0.0, 1e-2, cfg.quadrature_tol).residual
        fine = variation.schlafli_check(F, 0.0, 5e-3, cfg.quadrature_tol).residual
        ratio = coarse / fine if fine > 0 else math.inf
        return [ReportRow.compare(suite, f"{suite}.h-scaling", "residual(h) / residual(h/2) = 4", ratio, 4.0, 1.0)]

    tasks.append(scaling)
    return tasks


def dual_schlafli_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite, h, tol = "dual-schlafli", cfg.fd_step, schlafli_tolerance(cfg.fd_step)
    tasks = []
    for F in _families(cfg, inputs):
        for t in cfg.t_grid:
            def task(F=F, t=t):
                label = f"{F.name}.{_t_label(t)}"
                dual = variation.dual_schlafli_check(F, t, h, cfg.quadrature_tol)
                w = variation.w_schlafli_check(F, t, h, cfg.quadrature_tol)
                identity = variation.algebraic_identity_residual(edge_data_derivative(F, t, h))
                return [
                    ReportRow.compare(suite, f"{suite}.{label}", "dVol* = -1/2 sum theta dl (polyhedral analog)",
                                      dual.lhs, dual.rhs, tol),
                    ReportRow.compare(suite, f"{suite}.w.{label}", "dW = 1/4 sum (l dtheta - theta dl)",
                                      w.lhs, w.rhs, tol),
                    ReportRow(suite, f"{suite}.identity.{label}", "dVol* = dVol - 1/2 sum d(l theta)",
                              identity, 0.0, identity, 1e-9),
                ]
            tasks.append(task)

    def stationary():
        F = fixtures.polyhedron_family("quadratic-tetra-v1")
        dual = variation.dual_schlafli_check(F, 0.0, h, cfg.quadrature_tol)
        dl = max(abs(e.d_length) for e in edge_data_derivative(F, 0.0, h))
        return [
            ReportRow.compare(suite, f"{suite}.stationary.lhs", "dVol* = 0 where dl = 0", dual.lhs, 0.0, 1e-6),
            ReportRow.compare(suite, f"{suite}.stationary.dl", "max |dl| = 0", dl, 0.0, 1e-6),
        ]

    tasks.append(stationary)
    return tasks


# Tube suites

WEDGE_ANGLES = (math.pi / 6, math.pi / 3, math.pi / 2, math.pi, 2 * math.pi)
WEDGE_LENGTH = 2.0
FLAT_AREA = 1.7
VERTEX_OMEGA = 2.3


def _wedge_quadrature(theta: float, length: float, eps: float) -> float:
    value, _ = tplquad(
        lambda r, angle, s: math.cosh(r) * math.sinh(r),
        0.0, length,
        lambda s: 0.0, lambda s: theta,
        lambda s, angle: 0.0, lambda s, angle: eps,
        epsabs=1e-12, epsrel=1e-12,
    )
    return value


def _forms_gap(closed: tubes.FundamentalForms, numeric: tubes.FundamentalForms) -> float:
    return float(max(np.abs(closed.I - numeric.I).max(), np.abs(closed.II - numeric.II).max()))


def _torus_mean_curvature_quadrature(length: float, eps: float, nodes: int = 8) -> float:
    frame = tubes.LineFrame.standard()
    chart = frame.tube_chart(eps)
    points, weights = tensor_gauss_legendre([(0.0, length), (0.0, 2.0 * math.pi)], nodes)
    terms = []
    for (s, theta), w in zip(points, weights):
        forms = tubes.embedded_forms(chart, s, theta, lambda a, b: frame.tube_normal(eps, a, b))
        terms.append(w * forms.H * forms.area_element())
    return math.fsum(terms)


def _gradient_deviations(levels: int = 4) -> List[float]:
    """Maximal gradient deviation of the distance to successive chain refinements"""
    center = MPoint.origin()
    radius = fixtures.CHAIN_RADIUS
    directions = list(fixtures.CHAIN_DIRECTIONS)
    chain = fixtures.circle_chain()
    lo, hi = directions[0] + 0.05, directions[-1] - 0.05
    sites = [bent_chain.circle_point(center, radius + 0.3, psi) for psi in np.linspace(lo, hi, 11)]
    target = lambda x: bent_chain.distance_gradient(x, center.x)  # noqa: E731
    deviations = [bent_chain.gradient_deviation(chain, target, sites)]
    for _ in range(levels - 1):
        chain, directions = bent_chain.refine_to_circle(chain, center, radius, directions)
        deviations.append(bent_chain.gradient_deviation(chain, target, sites))
    return deviations


def tubes_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite = "tubes"
    tasks = []
    for eps in cfg.eps_grid:
        e = f"eps={eps:.4f}"

        def volumes(eps=eps, e=e):
            flat_oracle, _ = quad(lambda r: math.cosh(r) ** 2, 0.0, eps, epsabs=1e-13)
            vertex_oracle, _ = quad(lambda r: math.sinh(r) ** 2, 0.0, eps, epsabs=1e-13)
            rows = [
                ReportRow.compare(suite, f"{suite}.flat.{e}", "A/2 (sinh 2eps / 2 + eps)",
                                  tubes.tube_volume(tubes.TubeSpec("flat", eps, area=FLAT_AREA)),
                                  FLAT_AREA * flat_oracle, 1e-8),
                ReportRow.compare(suite, f"{suite}.vertex.{e}", "Omega (sinh 2eps - 2eps) / 4",
                                  tubes.tube_volume(tubes.TubeSpec("vertex", eps, omega=VERTEX_OMEGA)),
                                  VERTEX_OMEGA * vertex_oracle, 1e-8),
                ReportRow.compare(suite, f"{suite}.ball.{e}", "full solid angle gives the ball",
                                  tubes.tube_volume(tubes.TubeSpec("vertex", eps, omega=4.0 * math.pi)),
                                  math.pi * (math.sinh(2.0 * eps) - 2.0 * eps), 1e-12),
                ReportRow.compare(suite, f"{suite}.torus.{e}", "pi l sinh^2 eps",
                                  tubes.tube_volume(tubes.TubeSpec("torus", eps, length=WEDGE_LENGTH)),
                                  math.pi * WEDGE_LENGTH * math.sinh(eps) ** 2, 1e-12),
            ]
            for k, theta in enumerate(WEDGE_ANGLES):
                rows.append(ReportRow.compare(
                    suite, f"{suite}.wedge{k}.{e}", "theta l (cosh 2eps - 1) / 4",
                    tubes.tube_volume(tubes.TubeSpec("wedge", eps, theta=theta, length=WEDGE_LENGTH)),
                    _wedge_quadrature(theta, WEDGE_LENGTH, eps), 1e-7,
                ))
            return rows

        tasks.append(volumes)
        if eps <= 0:
            continue

        def forms(eps=eps, e=e):
            plane = tubes.PlaneFrame.standard()
            line = tubes.LineFrame.standard()
            sphere = tubes.SphereFrame.standard()
            pairs = [
                ("plane", tubes.plane_tube_forms(eps, (0.3, 0.2)),
                 tubes.embedded_forms(plane.tube_chart(eps), 0.3, 0.2, plane.tube_normal(eps, 0.3, 0.2))),
                ("line", tubes.line_tube_forms(eps, 0.4, 1.1),
                 tubes.embedded_forms(line.tube_chart(eps), 0.4, 1.1, line.tube_normal(eps, 0.4, 1.1))),
                ("sphere", tubes.vertex_tube_forms(eps, 1.0, 0.7),
                 tubes.embedded_forms(sphere.tube_chart(eps), 1.0, 0.7, sphere.tube_normal(eps, 1.0, 0.7))),
            ]
            rows = []
            for name, closed, numeric in pairs:
                gap = _forms_gap(closed, numeric)
                rows.append(ReportRow(suite, f"{suite}.forms-{name}.{e}", "closed-form I, II against embedded chart",
                                      gap, 0.0, gap, 1e-8))
            spec = tubes.TubeSpec("torus", eps, length=WEDGE_LENGTH)
            rows.append(ReportRow.compare(
                suite, f"{suite}.torus-H.{e}", "int H = -l mu cosh 2eps",
                _torus_mean_curvature_quadrature(WEDGE_LENGTH, eps), tubes.mean_curvature_integral(spec), 1e-8,
            ))
            return rows

        def chain_window(eps=eps, e=e):
            chain = fixtures.circle_chain()
            spec = tubes.TubeSpec("chain", eps, chain=chain)
            pencil = tubes.TubeSpec("chain", eps, chain=bent_chain.pencil_split(chain, 0, 3))
            curvature = max(
                float(f.principal_curvatures()[-1]) for f in bent_chain.window_forms(chain, eps)
            )
            return [
                ReportRow.compare(suite, f"{suite}.chain-H.{e}", "window int H from plane and line pieces",
                                  bent_chain.window_mean_curvature_quadrature(chain, eps),
                                  tubes.mean_curvature_integral(spec), 1e-7),
                ReportRow.compare(suite, f"{suite}.chain-volume.{e}", "pencil splits keep the window tube volume",
                                  tubes.tube_volume(pencil), tubes.tube_volume(spec), 1e-12),
                ReportRow.bound(suite, f"{suite}.chain-convex.{e}", "II <= 0 on the window eps-surface",
                                curvature, 0.0, 1e-9),
            ]

        tasks.extend([forms, chain_window])

    def refinement():
        chain = fixtures.circle_chain()
        theta = chain.angles[0]
        pencil = bent_chain.pencil_split(chain, 0, 4)
        null = bent_chain.refine(chain, 0, bent_chain.ChainSplit(theta, 0.0))
        rows = [
            ReportRow.compare(suite, f"{suite}.refine.telescoping", "pencil splits keep the transverse bending",
                              pencil.transverse_bending(), theta, 1e-12),
            ReportRow.compare(suite, f"{suite}.refine.null-split", "zero second angle leaves the chain",
                              null.line_count, chain.line_count, 0.0),
        ]
        deviations = _gradient_deviations()
        for k in range(1, len(deviations)):
            rows.append(ReportRow.bound(
                suite, f"{suite}.refine.gradient{k}", "distance gradients converge under refinement",
                deviations[k], deviations[k - 1], 1e-12,
            ))
        return rows

    tasks.append(refinement)
    return tasks


def core_expansion_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite = "core-expansion"
    length = 1.0
    tasks = []

    def torus():
        rows = []
        for eps in np.round(np.arange(1, 11) * 0.1, 10):
            e = f"eps={eps:.4f}"
            closed = tubes.solid_torus_closed_form(length, eps)
            rows.append(ReportRow.compare(suite, f"{suite}.torus-assembly.{e}", "Vol(N) + 1/2 int H = -pi l cosh^2",
                                          tubes.solid_torus_dual_volume(length, eps), closed, 1e-9))
            expansion = tubes.core_dual_volume_expansion(-math.pi * length, 2.0 * math.pi * length, 0, eps)
            rows.append(ReportRow.compare(suite, f"{suite}.torus-expansion.{e}", "Vol*_0 - l mu/4 (cosh 2eps - 1)",
                                          expansion, closed, 1e-9))
        return rows

    tasks.append(torus)
    for name, P in _polyhedra(inputs):
        def polyhedron(name=name, P=P):
            base = volume(P, cfg.quadrature_tol)
            rows = [ReportRow.compare(suite, f"{suite}.{name}.gauss-bonnet", "sum Omega = 4 pi + sum area",
                                      P.total_solid_angle(), 4.0 * math.pi + P.total_face_area(), 1e-9)]
            for eps in (0.05, 0.1, 0.2):
                rows.append(ReportRow.compare(
                    suite, f"{suite}.{name}.eps={eps:.4f}", "core expansion with face and vertex corrections",
                    tubes.polyhedron_dual_volume_expansion(P, eps, base_volume=base),
                    tubes.neighborhood_dual_volume(P, eps, base_volume=base), 1e-7,
                ))
            return rows
        tasks.append(polyhedron)
    return tasks


# Lengths


def _random_sl2(rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """exp of a random traceless matrix, well conditioned for small scale"""
    X = scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    X -= 0.5 * np.trace(X) * np.eye(2)
    return expm(X)


def lengths_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite = "lengths"
    tasks = []

    def traces():
        rng = np.random.default_rng(cfg.seed)
        rows = [
            ReportRow.compare(suite, f"{suite}.diag", "diag(e, 1/e) has length 2",
                              laminations.real_length(np.diag([math.e, 1.0 / math.e]).astype(complex)), 2.0, 1e-12),
        ]
        tr = 2.0 * np.cosh(complex(0.5, 0.25))
        lam = laminations.complex_length(np.array([[tr, -1.0], [1.0, 0.0]], dtype=complex))
        rows.append(ReportRow(suite, f"{suite}.trace", "tr = 2 cosh(lambda / 2)", lam.real, 1.0,
                              abs(lam - complex(1.0, 0.5)), 1e-10))
        worst_conj, worst_inv = 0.0, 0.0
        for _ in range(20):
            A = _random_sl2(rng, 1.0)
            try:
                lam_a = laminations.complex_length(A)
            except laminations.NonLoxodromicError:
                continue
            B = _random_sl2(rng)
            conj = laminations.complex_length(B @ A @ laminations.sl2_inverse(B))
            twist = math.remainder(conj.imag - lam_a.imag, 2.0 * math.pi)
            worst_conj = max(worst_conj, abs(conj.real - lam_a.real) + abs(twist))
            worst_inv = max(worst_inv, abs(laminations.real_length(laminations.sl2_inverse(A)) - lam_a.real))
        rows.append(ReportRow(suite, f"{suite}.conjugation", "lambda(B A B^-1) = lambda(A)",
                              worst_conj, 0.0, worst_conj, 1e-10))
        rows.append(ReportRow(suite, f"{suite}.inverse", "l(A^-1) = l(A)", worst_inv, 0.0, worst_inv, 1e-10))
        return rows

    def multicurves():
        rho = fixtures.bending_path().at(0.0)
        single = laminations.RationalLamination((laminations.Curve("abcB", 1.0),))
        base = laminations.lamination_length(rho, single)
        rotations = ["abcB", "bcBa", "cBab", "Babc"]
        spread = max(abs(laminations.word_length(rho, w) - base) for w in rotations)
        alpha = laminations.RationalLamination((laminations.Curve("a", 0.7), laminations.Curve("bc", 1.2)))
        beta = laminations.RationalLamination((laminations.Curve("a", 0.75), laminations.Curve("bc", 1.1)))
        gap = abs(laminations.lamination_length(rho, alpha) - laminations.lamination_length(rho, beta))
        return [
            ReportRow.compare(suite, f"{suite}.homogeneous", "L(2.5 alpha) = 2.5 L(alpha)",
                              laminations.lamination_length(rho, single.scaled(2.5)), 2.5 * base, 1e-12),
            ReportRow.compare(suite, f"{suite}.union", "L(alpha u alpha) = 2 L(alpha)",
                              laminations.lamination_length(rho, single.union(single)), 2.0 * base, 1e-12),
            ReportRow(suite, f"{suite}.cyclic", "cyclic permutations keep the length", spread, 0.0, spread, 1e-12),
            ReportRow.bound(suite, f"{suite}.lipschitz", "|L(alpha) - L(beta)| <= sum |du| max l",
                            gap, laminations.lipschitz_bound(rho, alpha, beta), 1e-12),
        ]

    tasks.extend([traces, multicurves])

    paths = [
        (fixtures.rep_path(name), laminations.RationalLamination(
            tuple(laminations.Curve(w, u) for w, u in fixtures.PATH_LAMINATIONS[name])))
        for name in fixtures.REP_PATHS
    ] + list(inputs.paths)
    for P, alpha in paths:
        def derivative(P=P, alpha=alpha):
            rows = []
            for t in np.linspace(-0.2, 0.2, 5):
                d = laminations.length_derivative(P, alpha, float(t), cfg.fd_step)
                rows.append(ReportRow(suite, f"{suite}.{P.name}.{_t_label(t)}", "dL: central difference vs trace",
                                      d.fd, d.analytic, d.residual, 1e-6))
            return rows
        tasks.append(derivative)

    def explicit():
        P = fixtures.lox_stretch_path()
        alpha = laminations.RationalLamination((laminations.Curve("a", 1.0),))
        d = laminations.length_derivative(P, alpha, 0.0, cfg.fd_step)
        return [ReportRow.compare(suite, f"{suite}.lox-stretch.explicit", "l(t) = 2 (1 + t)", d.analytic, 2.0, 1e-8)]

    def metric():
        torus = fixtures.warped_torus_deformation()
        conformal = fixtures.conformal_sine_deformation()
        static = fixtures.static_deformation()
        core = torus.domain[1]
        h = 1e-3
        fd = (laminations.curve_length(torus, h) - laminations.curve_length(torus, -h)) / (2.0 * h)
        return [
            ReportRow.compare(suite, f"{suite}.metric.torus", "first variation = l_0",
                              laminations.first_variation_integral(torus), core, 1e-9),
            ReportRow.compare(suite, f"{suite}.metric.torus-fd", "first variation = d/dt length",
                              laminations.first_variation_integral(torus), fd, 1e-7),
            ReportRow.compare(suite, f"{suite}.metric.conformal", "int sin = 1 - cos L",
                              laminations.first_variation_integral(conformal),
                              1.0 - math.cos(conformal.domain[1]), 1e-9),
            ReportRow.compare(suite, f"{suite}.metric.static", "g_dot = 0",
                              laminations.first_variation_integral(static), 0.0, 1e-12),
        ]

    tasks.extend([explicit, metric])
    return tasks


# Allowed excess of margin(t) / |t| over the fitted constant at held-out times
MARGIN_SLACK = 1.25


def margins_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite = "margins"
    eps = cfg.margin_eps
    frame = fixtures.margin_plane()
    sites = tubes.site_grid()
    anchor = "II_t + tanh(eps) I_t <= D |t| I_t"

    def rigid(name: str, tol: float):
        def task():
            F = fixtures.diffeo_family(name)
            return [
                ReportRow.bound(suite, f"{suite}.{name}.{_t_label(t)}", anchor,
                                tubes.convexity_margin(F, frame, eps, t, sites), 0.0, tol)
                for t in [0.0] + list(cfg.margin_times)
            ]
        return task

    def dilation():
        F = fixtures.diffeo_family("klein-dilation-v1")
        D, margins = tubes.fit_margin_constant(F, frame, eps, cfg.margin_times, sites)
        rows = [ReportRow.bound(suite, f"{suite}.klein-dilation-v1.{_t_label(0.0)}", anchor,
                                tubes.convexity_margin(F, frame, eps, 0.0, sites), 0.0, 1e-9)]
        # D is fitted on margin_times; the bound is checked at half the smallest of them
        smallest = min(abs(t) for t in cfg.margin_times)
        held_out = sorted({0.5 * t for t in cfg.margin_times if abs(t) == smallest})
        for t in held_out:
            m = tubes.convexity_margin(F, frame, eps, t, sites)
            rows.append(ReportRow.bound(suite, f"{suite}.klein-dilation-v1.held-out.{_t_label(t)}", anchor,
                                        m, MARGIN_SLACK * D * abs(t), 1e-9))
        for t, m in zip(cfg.margin_times, margins):
            if math.tanh(eps) >= D * abs(t):
                _, worst = tubes.image_stays_convex(F, frame, eps, t, sites)
                rows.append(ReportRow.bound(suite, f"{suite}.klein-dilation-v1.convex.{_t_label(t)}",
                                            "F_t keeps the eps-surface convex when tanh eps >= D|t|",
                                            worst, 0.0, 1e-9))
        logger.info(f"fitted margin constant D={D:.6g} at eps={eps}")
        return rows

    return [rigid("identity-v1", 1e-9), rigid("isometry-v1", 1e-8), dilation]


def smooth_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite = "smooth"
    anchor = "dVol* = 1/4 int <dI, H I - II> da"
    tasks = []

    def spheres():
        rows = []
        for r in cfg.smooth_radii:
            S = variation.SmoothFamilySpec("geodesic_sphere", r)
            report = variation.smooth_dual_variation_check(S, 0.0)
            closed = -4.0 * math.pi * math.cosh(r) ** 2
            label = f"r={r:.4f}"
            rows.append(ReportRow.compare(suite, f"{suite}.sphere.{label}", anchor, report.lhs, report.rhs, 1e-7))
            rows.append(ReportRow.compare(suite, f"{suite}.sphere-closed.{label}", "-4 pi cosh^2 r",
                                          report.rhs, closed, 1e-7))
        return rows

    def tubes_and_frozen():
        plane = variation.SmoothFamilySpec("plane_tube", 0.4)
        line = variation.SmoothFamilySpec("line_tube", 0.6, length=1.5)
        frozen = variation.SmoothFamilySpec("geodesic_sphere", 0.5, speed=0.0)
        rows = []
        for name, S in (("plane", plane), ("line", line), ("frozen", frozen)):
            report = variation.smooth_dual_variation_check(S, 0.0)
            rows.append(ReportRow.compare(suite, f"{suite}.{name}", anchor, report.lhs, report.rhs, 1e-7))

        def closed_line(eps):
            spec = tubes.TubeSpec("wedge", eps, theta=line.theta0, length=line.length)
            return tubes.tube_volume(spec) + 0.5 * tubes.mean_curvature_integral(spec)

        h = 1e-3
        closed_derivative = (8 * (closed_line(0.6 + h) - closed_line(0.6 - h))
                             - (closed_line(0.6 + 2 * h) - closed_line(0.6 - 2 * h))) / (12 * h)
        lhs = variation.smooth_dual_variation_check(line, 0.0).lhs
        rows.append(ReportRow.compare(suite, f"{suite}.line-closed", "matches the tube closed form",
                                      lhs, closed_derivative, 1e-8))
        return rows

    def integrands():
        cases = [
            ("sphere", variation.SmoothFamilySpec("geodesic_sphere", 0.5), -4.0 / math.tanh(0.5) ** 2),
            ("plane", variation.SmoothFamilySpec("plane_tube", 0.4), -4.0 * math.tanh(0.4) ** 2),
            ("line", variation.SmoothFamilySpec("line_tube", 0.6), -4.0),
            ("frozen", variation.SmoothFamilySpec("geodesic_sphere", 0.5, speed=0.0), 0.0),
        ]
        rows = []
        for name, S, expected in cases:
            value = variation.normal_flow_integrand(S, 0.0, (1.0, 0.3))
            residual = max(S.delta_I_residual(0.0, p) for p in [(0.2, 0.1), (1.0, 0.3), (2.0, -0.4)])
            rows.append(ReportRow.compare(suite, f"{suite}.integrand-{name}", "<dI, H I - II> = -4 f K_e",
                                          value, expected, 1e-9))
            rows.append(ReportRow.bound(suite, f"{suite}.integrand-sign-{name}", "integrand <= 0 for f >= 0",
                                        value, 0.0, 0.0))
            rows.append(ReportRow(suite, f"{suite}.delta-I-{name}", "dI matches d/dt I_t",
                                  residual, 0.0, residual, 1e-8))
        return rows

    return [spheres, tubes_and_frozen, integrands]


def monotonicity_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite = "monotonicity"
    anchor = "N in N' implies Vol*(N) >= Vol*(N')"
    tol = cfg.quadrature_tol
    tasks = []

    def fixed():
        P = fixtures.base_tetrahedron()
        scaled = hull([MPoint.from_klein(y) for y in 2.0 * fixtures.BASE_TETRA])
        contained_self, self_margin = variation.monotonicity_check(P, P, tol)
        contained, margin = variation.monotonicity_check(P, scaled, tol)
        return [
            ReportRow.compare(suite, f"{suite}.self", "P in P has margin 0",
                              self_margin if contained_self else math.nan, 0.0, 1e-12),
            ReportRow.bound(suite, f"{suite}.scaled", anchor,
                            -margin if contained else math.nan, 0.0, 0.0),
        ]

    tasks.append(fixed)
    rng = np.random.default_rng(cfg.seed)
    pairs = [variation.nested_pair(rng) for _ in range(cfg.monotonic_pairs)]
    for k, (inner, outer) in enumerate(pairs):
        def task(k=k, inner=inner, outer=outer):
            contained, margin = variation.monotonicity_check(inner, outer, tol)
            lhs = -margin if contained else math.nan
            return [ReportRow.bound(suite, f"{suite}.pair{k:04d}", anchor, lhs, 0.0, 1e-9)]
        tasks.append(task)
    return tasks


def epsilon_limit_tasks(cfg: SuiteConfigModel, inputs: SuiteInputs) -> List[Task]:
    suite = "epsilon-limit"
    tasks = []
    for name, P in _polyhedra(inputs):
        def limit(name=name, P=P):
            r = variation.epsilon_limit_check(P, tol=cfg.quadrature_tol)
            return [ReportRow.compare(suite, f"{suite}.{name}", "Vol*(N_eps P) -> Vol*(P)", r.lhs, r.rhs, 1e-7)]
        tasks.append(limit)

    def continuity():
        P = fixtures.base_tetrahedron()
        tol = cfg.quadrature_tol
        coarse = variation.continuity_modulus(P, 1e-3, seed=cfg.seed, tol=tol)
        fine = variation.continuity_modulus(P, 5e-4, seed=cfg.seed, tol=tol)
        rigid = variation.continuity_modulus(P, 1e-3, seed=cfg.seed, mode="isometry", tol=tol)
        zero = variation.continuity_modulus(P, 0.0, seed=cfg.seed, tol=tol)
        return [
            ReportRow.compare(suite, f"{suite}.continuity.zero", "modulus at delta 0", zero, 0.0, 0.0),
            ReportRow.bound(suite, f"{suite}.continuity.halving", "modulus(delta/2) <= 3/4 modulus(delta)",
                            fine, 0.75 * coarse, 0.0),
            ReportRow.compare(suite, f"{suite}.continuity.isometry", "isometries keep Vol*", rigid, 0.0, 1e-9),
        ]

    tasks.append(continuity)
    return tasks


SUITES: Dict[str, Callable[[SuiteConfigModel, SuiteInputs], List[Task]]] = {
    "schlafli": schlafli_tasks,
    "dual-schlafli": dual_schlafli_tasks,
    "tubes": tubes_tasks,
    "core-expansion": core_expansion_tasks,
    "lengths": lengths_tasks,
    "margins": margins_tasks,
    "smooth": smooth_tasks,
    "monotonicity": monotonicity_tasks,
    "epsilon-limit": epsilon_limit_tasks,
}


def _guarded(suite: str, index: int, task: Task) -> List[ReportRow]:
    """Run a task; a domain error becomes a failing row instead of aborting the suite"""
    try:
        return task()
    except ValueError as e:
        logger.error(f"{suite} task {index} failed: {e}")
        return [ReportRow(suite, f"{suite}.error{index:03d}", str(e), math.nan, math.nan, math.nan, 0.0)]


def run_suite(name: str, config: Optional[SuiteConfigModel] = None,
              inputs: Optional[SuiteInputs] = None) -> SuiteReport:
    """
    Run a named suite (or 'all') and collect its rows sorted by check id

    Raises:
        UnknownSuiteError: for names other than SUITE_NAMES and 'all'
    """
    if name != "all" and name not in SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}, expected one of {', '.join(SUITE_NAMES)} or all")
    cfg = config or SuiteConfigModel()
    inputs = inputs or SuiteInputs()
    names = list(SUITE_NAMES) if name == "all" else [name]

    start = time.perf_counter()
    logger.info(f"Running suite {name} with {cfg.threads} thread(s), seed {cfg.seed}")
    tasks = []
    for suite in names:
        tasks.extend((suite, k, task) for k, task in enumerate(SUITES[suite](cfg, inputs)))
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(lambda job: _guarded(*job), tasks))
    rows = sorted((row for batch in results for row in batch), key=lambda row: row.check)
    wall_time = time.perf_counter() - start

    report = SuiteReport(name, rows, wall_time, cfg.model_dump())
    logger.info(f"Suite {name}: {len(rows)} rows, {len(report.failing())} failing, {wall_time:.2f} s")
    for check in report.failing():
        logger.warning(f"Check {check} did not pass")
    return report


def json_safe(value):
    """Copy of a JSON-ready value with non-finite floats written as "nan", "inf" or "-inf" """
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def emit(report: SuiteReport, fmt: str = "json", include_timing: bool = False) -> str:
    """
    Serialize a report with a stable field order

    JSON floats use the shortest repr that round-trips exactly and non-finite
    values become the strings "nan", "inf" and "-inf", the same spelling as the
    CSV cells. CSV floats use 17 significant digits. An empty report gives a
    header-only CSV.
    """
    if fmt == "json":
        payload = {"suite": report.suite, "pass": report.passed}
        if include_timing:
            payload["wall_time"] = report.wall_time
        payload["config"] = report.config
        payload["rows"] = [row.as_dict() for row in report.rows]
        return json.dumps(json_safe(payload), indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        frame = pd.DataFrame([row.as_dict() for row in report.rows], columns=CSV_COLUMNS)
        return frame.to_csv(index=False, float_format="%.17g", na_rep="nan")
    raise ValueError(f"unknown report format {fmt!r}, expected json or csv")


def _row_from_record(record: dict) -> ReportRow:
    return ReportRow(
        str(record["suite"]), str(record["check"]), str(record["anchor"]),
        float(record["lhs"]), float(record["rhs"]), float(record["residual"]), float(record["tolerance"]),
    )


def report_from_json(text: str) -> SuiteReport:
    payload = json.loads(text)
    rows = [_row_from_record(r) for r in payload["rows"]]
    return SuiteReport(payload["suite"], rows, payload.get("wall_time", 0.0), payload.get("config", {}))


def report_from_csv(text: str, suite: str = "") -> SuiteReport:
    """Rows of a CSV report read back with round-trip float parsing"""
    frame = pd.read_csv(
        io.StringIO(text),
        float_precision="round_trip",
        dtype={"suite": str, "check": str, "anchor": str},
        keep_default_na=False,
        na_values={c: ["nan", "NaN"] for c in ("lhs", "rhs", "residual", "tolerance")},
    )
    rows = [_row_from_record(r) for r in frame.to_dict("records")]
    return SuiteReport(suite or (rows[0].suite if rows else ""), rows)
