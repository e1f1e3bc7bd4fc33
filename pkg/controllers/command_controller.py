"""
Command controllers for schlafli-lab

Each handler loads and validates its inputs, runs one module operation and
returns a JSON-ready dict carrying a "pass" flag the CLI turns into an exit code.
"""
import logging
import math
from dataclasses import asdict
from typing import Any, Dict, Optional

from models.validation import (
    CheckInputModel, InputFileError, SuiteConfigModel, SuiteInputModel, load_model, read_json,
    validate_data,
)
from modules import fixtures, tubes, variation
from modules.config import config
from modules.harness import SuiteInputs, SuiteReport, schlafli_tolerance, run_suite
from modules.polyhedra import ConvexPolyhedron

logger = logging.getLogger(__name__)

CHECK_KINDS = ("schlafli", "dual-schlafli", "smooth", "monotonic", "continuity")
SMOOTH_TOLERANCE = 1e-7
MONOTONIC_TOLERANCE = 1e-9


def _require(value, name: str, path: str):
    if value is None:
        raise InputFileError(path, f"/{name}", f"this check needs '{name}'")
    return value


def _report_dict(report: variation.VariationReport, tolerance: float) -> Dict[str, Any]:
    data = asdict(report)
    data["stencil"] = list(report.stencil)
    data["tolerance"] = tolerance
    data["pass"] = bool(report.residual <= tolerance)
    return data


class CommandController:
    """Handlers behind the schlafli-lab subcommands"""

    @staticmethod
    def suite_config(config_path: Optional[str] = None, seed: Optional[int] = None,
                     threads: Optional[int] = None) -> SuiteConfigModel:
        """
        Effective suite configuration: environment defaults, then the config file, then --seed
        """
        data = config.suite_defaults()
        source = "<defaults>"
        if config_path:
            overrides = read_json(config_path)
            if not isinstance(overrides, dict):
                raise InputFileError(config_path, "", "configuration must be a JSON object")
            data.update(overrides)
            source = config_path
        if seed is not None:
            data["seed"] = seed
        if threads is not None:
            data["threads"] = threads
        return validate_data(data, SuiteConfigModel, source)

    @staticmethod
    def suite_inputs(in_path: Optional[str] = None) -> SuiteInputs:
        if not in_path:
            return SuiteInputs()
        model = load_model(in_path, SuiteInputModel)
        return SuiteInputs(
            families=[f.to_family() for f in model.families],
            polyhedra=[p.to_polyhedron() for p in model.polyhedra],
            paths=[(p.path.to_path(), p.lamination.to_lamination()) for p in model.paths],
        )

    @staticmethod
    def suite(name: str, in_path: Optional[str] = None, config_path: Optional[str] = None,
              seed: Optional[int] = None) -> SuiteReport:
        cfg = CommandController.suite_config(config_path, seed)
        inputs = CommandController.suite_inputs(in_path)
        return run_suite(name, cfg, inputs)

    @staticmethod
    def check(kind: str, in_path: str, t: Optional[float] = None, h: Optional[float] = None,
              seed: Optional[int] = None) -> Dict[str, Any]:
        """
        Run a single verification check on a JSON input

        Returns:
            {"check", "pass", "reports"} with one entry per evaluated parameter

        Raises:
            InputFileError: missing or malformed input
            ValueError: unknown check kind or a numerical precondition failure
        """
        if kind not in CHECK_KINDS:
            raise ValueError(f"unknown check {kind!r}, expected one of {', '.join(CHECK_KINDS)}")
        data = load_model(in_path, CheckInputModel)
        step = h if h is not None else config.fd_step
        times = [t] if t is not None else [0.0]
        tol = config.quadrature_tol
        reports = []

        if kind in ("schlafli", "dual-schlafli"):
            family = _require(data.family, "family", in_path).to_family()
            run = variation.schlafli_check if kind == "schlafli" else variation.dual_schlafli_check
            for at in times:
                reports.append(_report_dict(run(family, at, step, tol), schlafli_tolerance(step)))

        elif kind == "smooth":
            spec = _require(data.smooth, "smooth", in_path)
            S = variation.SmoothFamilySpec(**spec.model_dump())
            for at in times:
                stencil_step = h if h is not None else variation.SMOOTH_STEP
                reports.append(_report_dict(variation.smooth_dual_variation_check(S, at, stencil_step),
                                            SMOOTH_TOLERANCE))

        elif kind == "monotonic":
            inner = _require(data.inner, "inner", in_path).to_polyhedron()
            outer = _require(data.outer, "outer", in_path).to_polyhedron()
            contained, margin = variation.monotonicity_check(inner, outer, tol)
            reports.append({
                "contained": contained,
                "margin": margin,
                "tolerance": MONOTONIC_TOLERANCE,
                "pass": bool(contained and margin >= -MONOTONIC_TOLERANCE),
            })

        else:
            P: ConvexPolyhedron = _require(data.polyhedron, "polyhedron", in_path).to_polyhedron()
            check_seed = seed if seed is not None else config.seed
            full = variation.continuity_modulus(P, data.delta, data.samples, check_seed, data.mode, tol)
            half = variation.continuity_modulus(P, 0.5 * data.delta, data.samples, check_seed, data.mode, tol)
            reports.append({
                "delta": data.delta,
                "modulus": full,
                "modulus_half": half,
                "mode": data.mode,
                "pass": bool(half <= 0.75 * full or full == 0.0),
            })

        passed = all(r["pass"] for r in reports)
        logger.info(f"check {kind} on {in_path}: {'pass' if passed else 'fail'}")
        return {"check": kind, "pass": passed, "reports": reports}

    @staticmethod
    def tube(kind: str, eps: float, theta: float = 0.0, length: float = 0.0, area: float = 0.0,
             omega: float = 0.0) -> Dict[str, Any]:
        """Tube volume and mean curvature integral over the eps-surface of a single piece"""
        spec = tubes.TubeSpec(kind, eps, area=area, length=length, theta=theta, omega=omega)
        vol = tubes.tube_volume(spec)
        h_integral = tubes.mean_curvature_integral(spec)
        return {
            "kind": kind,
            "eps": eps,
            "volume": vol,
            "mean_curvature_integral": h_integral,
            "dual_volume_contribution": vol + 0.5 * h_integral,
            "pass": True,
        }

    @staticmethod
    def core_expansion(vstar: float, lmu: float, chi: int, eps: float) -> Dict[str, Any]:
        value = tubes.core_dual_volume_expansion(vstar, lmu, chi, eps)
        return {"vstar0": vstar, "lmu": lmu, "chi": chi, "eps": eps, "dual_volume": value, "pass": True}

    @staticmethod
    def margin(family: str, eps: float, t: float) -> Dict[str, Any]:
        """
        Convexity margin of F_t applied to the eps-surface of the built-in margin plane

        pass reports whether the deformed surface stays locally convex at every site.
        """
        try:
            F = fixtures.diffeo_family(family)
        except KeyError as e:
            raise ValueError(str(e.args[0]))
        frame = fixtures.margin_plane()
        sites = tubes.site_grid()
        value = tubes.convexity_margin(F, frame, eps, t, sites)
        convex, worst = tubes.image_stays_convex(F, frame, eps, t, sites)
        radius = tubes.convexity_radius(value / abs(t), t) if t != 0 and value > 0 else 0.0
        return {
            "family": F.name,
            "eps": eps,
            "t": t,
            "margin": value,
            "largest_curvature": worst,
            "convexity_radius": None if math.isinf(radius) else radius,
            "pass": convex,
        }
