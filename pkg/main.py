"""
schlafli-lab command-line entry point

Reports go to standard output; logs and failing check ids go to standard error.
Exit status: 0 when every check passes, 1 when a check fails, 2 on invalid input.
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

from controllers.command_controller import CHECK_KINDS, CommandController
from modules.config import config
from modules.harness import SUITE_NAMES, SuiteReport, emit, json_safe

logger = logging.getLogger("schlafli_lab")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="in_path", default=None, help="JSON input file")
    common.add_argument("--config", dest="config_path", default=None, help="JSON suite configuration")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="Report format (default: json)")
    common.add_argument("--seed", type=int, default=None, help="Seed for randomized checks (overrides config)")
    common.add_argument("--timing", action="store_true", help="Include wall time in JSON suite reports")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="schlafli-lab",
        description="Numerical verification of Schlafli-type variation formulas in hyperbolic 3-space.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name in SUITE_NAMES + ("all",):
        commands.add_parser(name, parents=[common], help=f"Run the {name} suite")
    run = commands.add_parser("run", parents=[common], help="Run a suite by name")
    run.add_argument("suite", help="Suite name or 'all'")

    check = commands.add_parser("check", parents=[common], help="Run one check on a JSON input")
    check.add_argument("kind", choices=CHECK_KINDS)
    check.add_argument("--t", type=float, default=None, help="Family parameter (default: 0)")
    check.add_argument("--h", type=float, default=None, help="Finite-difference step")

    tube = commands.add_parser("tube", parents=[common], help="Tube volume over one piece")
    tube.add_argument("--kind", choices=["flat", "wedge", "vertex", "torus"], required=True)
    tube.add_argument("--eps", type=float, required=True)
    tube.add_argument("--theta", type=float, default=0.0, help="Wedge angle")
    tube.add_argument("--length", type=float, default=0.0, help="Segment or core length")
    tube.add_argument("--area", type=float, default=0.0, help="Flat piece area")
    tube.add_argument("--omega", type=float, default=0.0, help="Exterior solid angle")

    core = commands.add_parser("core-expansion", parents=[common], help="Dual volume of a core eps-neighbourhood")
    core.add_argument("--vstar", type=float, required=True, help="Dual volume of the core")
    core.add_argument("--lmu", type=float, required=True, help="Length of the bending lamination")
    core.add_argument("--chi", type=int, default=0, help="Euler characteristic of the boundary")
    core.add_argument("--eps", type=float, required=True)

    margin = commands.add_parser("margin", parents=[common], help="Convexity margin of a deformed eps-surface")
    margin.add_argument("--family", required=True, help="builtin:<name> deformation family")
    margin.add_argument("--eps", type=float, required=True)
    margin.add_argument("--t", type=float, required=True)
    return parser


def _suite_exit(report: SuiteReport) -> int:
    failing = report.failing()
    if failing:
        print(f"{len(failing)} failing check(s):", file=sys.stderr)
        for check in failing:
            print(f"  {check}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "run" or args.command in SUITE_NAMES + ("all",):
        name = args.suite if args.command == "run" else args.command
        report = CommandController.suite(name, args.in_path, args.config_path, args.seed)
        sys.stdout.write(emit(report, args.format, args.timing))
        logger.info(f"{name} finished in {report.wall_time:.2f} s")
        return _suite_exit(report)

    if args.command == "check":
        if not args.in_path:
            raise ValueError("check needs --in <json>")
        result = CommandController.check(args.kind, args.in_path, args.t, args.h, args.seed)
    elif args.command == "tube":
        result = CommandController.tube(args.kind, args.eps, args.theta, args.length, args.area, args.omega)
    elif args.command == "core-expansion":
        result = CommandController.core_expansion(args.vstar, args.lmu, args.chi, args.eps)
    else:
        result = CommandController.margin(args.family, args.eps, args.t)

    sys.stdout.write(json.dumps(json_safe(result), indent=2, allow_nan=False) + "\n")
    if not result["pass"]:
        print(f"{args.command} did not pass", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=config.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return dispatch(args)
    except ValueError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
