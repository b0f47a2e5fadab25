#!/usr/bin/env python3
"""singlink command line: analyze, census, trace and formulas."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from singlink.common import EXIT_INPUT_ERROR, EXIT_OK, SinglinkError, setup_logging
from singlink.config import RunConfig
from singlink.diskspec import DslSyntaxError
from singlink.invariants import (
    normal_degree_branched,
    normal_degree_immersed,
    normal_degree_thm1,
    smoothing_double_points,
    tangent_degree,
)
from singlink.pipeline import AnalyzePipeline, CensusPipeline, TracePipeline, raise_on_failure
from singlink.report import (
    analysis_text,
    analysis_to_dict,
    census_result_to_dict,
    census_text,
    trace_to_dict,
    write_json,
)
from singlink.svg import write_svg

logger = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors are input errors: exit status 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def run_config(args) -> RunConfig:
    given = vars(args)
    overrides = {name: given[name] for name in RunConfig.field_names() if name in given}
    return RunConfig.load(args.config, overrides)


def cmd_analyze(args) -> int:
    config = run_config(args)
    result = AnalyzePipeline(args.file, config).start()
    if config.json_path is not None:
        write_json(analysis_to_dict(result), config.json_path)
    if config.json_path != "-":
        sys.stdout.write(analysis_text(result))
    if config.svg_path is not None:
        write_svg(result.diagram, config.svg_path, Path(args.file).stem)
    raise_on_failure(result)
    return EXIT_OK


def cmd_census(args) -> int:
    config = run_config(args)
    result = CensusPipeline(args.file, config).start()
    if config.json_path is not None:
        write_json(census_result_to_dict(result), config.json_path)
    if config.json_path != "-":
        sys.stdout.write(census_text(result))
    raise_on_failure(result)
    return EXIT_OK


def cmd_trace(args) -> int:
    config = run_config(args)
    loops = TracePipeline(args.file, config).start()
    write_json(trace_to_dict(loops), config.json_path)
    return EXIT_OK


def cmd_formulas(args) -> int:
    if args.formula == "tangent":
        value = tangent_degree(args.chi, args.orders)
    elif args.formula == "normal-immersed":
        value = normal_degree_immersed(args.selfint, args.dbl)
    elif args.formula == "normal-thm1":
        value = normal_degree_thm1(args.selfint, args.E)
    elif args.formula == "normal-branched":
        value = normal_degree_branched(args.selfint, args.dbl, args.e)
    else:
        value = smoothing_double_points(args.e, args.N)
    print(value)
    return EXIT_OK


def _run_options() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("file", help=".sing file describing the disks")
    common.add_argument("--config", help="YAML file with run settings")
    common.add_argument("--debug", action="store_true", help="enable debug level logging")
    common.add_argument("--trace", action="store_true", help="enable trace level logging")
    common.add_argument("--workers", type=int, help="threads for the census")
    common.add_argument("--mode", dest="trace_mode", choices=["continuation", "multiseed"])
    common.add_argument("--epsilon", type=float, help="radius of the sphere")
    common.add_argument("--samples", type=int, help="samples per loop, a power of two")
    common.add_argument("--tol", type=float, help="relative sphere tolerance")
    common.add_argument("--json", dest="json_path", help="write the JSON report here ('-' for stdout)")
    return common


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="singlink", description="Links of branch points of surfaces in R^4")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _run_options()

    analyze = sub.add_parser("analyze", parents=[common], help="braid, crossing and linking invariants")
    analyze.add_argument("--svg", dest="svg_path", help="write the annular diagram as SVG")
    analyze.add_argument("--lambda", dest="lam", type=float, help="smoothing size for the census")
    analyze.add_argument("--r", type=float, help="cut-off radius for the census")
    analyze.add_argument("--selfint", type=int, help="self-intersection of the surface")
    analyze.add_argument("--chi", dest="euler_char", type=int, help="Euler characteristic of the surface")
    analyze.add_argument("--dbl", dest="double_points", type=int, help="signed number of double points")
    analyze.set_defaults(handler=cmd_analyze)

    census = sub.add_parser("census", parents=[common], help="gcd cascade and double-point census")
    census.add_argument("--lambda", dest="lam", type=float, help="smoothing size")
    census.add_argument("--r", type=float, help="cut-off radius")
    census.set_defaults(handler=cmd_census)

    trace = sub.add_parser("trace", parents=[common], help="dump the sampled loops as JSON")
    trace.set_defaults(handler=cmd_trace)

    formulas = sub.add_parser("formulas", help="degree formulas")
    which = formulas.add_subparsers(dest="formula", required=True)
    tangent = which.add_parser("tangent", help="chi + sum of branching orders")
    tangent.add_argument("--chi", type=int, required=True)
    tangent.add_argument("--orders", type=int, nargs="*", default=[])
    immersed = which.add_parser("normal-immersed", help="selfint - 2 * double points")
    immersed.add_argument("--selfint", type=int, required=True)
    immersed.add_argument("--dbl", type=int, required=True)
    thm1 = which.add_parser("normal-thm1", help="selfint - sum of E")
    thm1.add_argument("--selfint", type=int, required=True)
    thm1.add_argument("--E", type=int, nargs="*", default=[])
    branched = which.add_parser("normal-branched", help="selfint - 2 * double points - sum of e")
    branched.add_argument("--selfint", type=int, required=True)
    branched.add_argument("--dbl", type=int, required=True)
    branched.add_argument("--e", type=int, nargs="+", required=True)
    smoothing = which.add_parser("smoothing", help="double points left by smoothing one branch point")
    smoothing.add_argument("--e", type=int, required=True)
    smoothing.add_argument("--N", type=int, required=True)
    formulas.set_defaults(handler=cmd_formulas)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(getattr(args, "debug", False), getattr(args, "trace", False))
    try:
        return args.handler(args)
    except DslSyntaxError as e:
        logger.error(f"syntax error: {e}")
        return e.exit_code
    except SinglinkError as e:
        source = Path(args.file).name if getattr(args, "file", None) else "singlink"
        logger.error(f"{source}: {type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
