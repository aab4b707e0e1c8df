import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from bellcheck.bell.chsh import MeasurementQuad, SourceKind
from bellcheck.cli.reports import (
    PRESETS, RunReport, cmd_chsh, cmd_moment_check, cmd_simulate, cmd_spectral_demo, cmd_verify_quantum,
    error_report, parse_setting,
)
from bellcheck.config.settings import settings
from bellcheck.errors import BellCheckError, MarginalFeasibilityError
from bellcheck.logging.audit import Auditor
from bellcheck.logging.events import fmt_check, fmt_error, fmt_status
from bellcheck.models.hidden_variables import ModelKind
from bellcheck.storage.instances import bundled_instance_path, load_instance, load_operator_file

logger = logging.getLogger("bellcheck.cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_MARGINAL = 3


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Subcommands repeat the flags with SUPPRESS defaults so they work on either side.
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(None), help="u64 seed for random draws")
    parser.add_argument("--tol", type=float, default=d(None), help="tolerance for checks")
    parser.add_argument("--json-only", action="store_true", default=d(False), help="no stderr table")
    parser.add_argument("--radians", action="store_true", default=d(False), help="angles are in radians")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellcheck", description="Bell-theorem verification suites")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-quantum", parents=[common], help="singlet correlation identity on random pairs")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--a", help="fixed setting for party 1 (x|y|z, angle, or x,y,z)")
    p.add_argument("--b", help="fixed setting for party 2")

    p = sub.add_parser("chsh", parents=[common], help="CHSH value or search")
    p.add_argument("--source", default=SourceKind.QUANTUM.value, choices=[k.value for k in SourceKind])
    p.add_argument("--quad", help="four planar angles a,a',b,b'")
    p.add_argument("--table", help="2x2 correlations c_ab,c_ab',c_a'b,c_a'b' for --source table")
    p.add_argument("--search", action="store_true")
    p.add_argument("--grid-steps", type=int)
    p.add_argument("--refine-iters", type=int)

    p = sub.add_parser("moment-check", parents=[common], help="finite moment-problem feasibility")
    p.add_argument("path", help="instance file, or the name of a bundled instance")
    p.add_argument("--expect", choices=["feasible", "infeasible"])

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate of a hidden-variable correlation")
    p.add_argument("--model", required=True, choices=[k.value for k in ModelKind])
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--lanes", type=int)

    p = sub.add_parser("spectral-demo", parents=[common], help="classical representation of commuting observables")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=list(PRESETS))
    g.add_argument("--matrix-file")
    return parser


def _floats(text: str, count: int, what: str) -> List[float]:
    parts = [x for x in text.split(",") if x.strip()]
    if len(parts) != count:
        raise ValueError(f"{what} needs {count} comma-separated numbers, got {text!r}")
    return [float(x) for x in parts]


def _resolve_instance(path: str):
    """A path on disk, else a bundled instance by name."""
    bundled = bundled_instance_path(path)
    return load_instance(path if Path(path).exists() or not bundled.exists() else bundled)


def _run(args: argparse.Namespace, degrees: bool) -> RunReport:
    if args.command == "verify-quantum":
        return cmd_verify_quantum(
            trials=args.trials, seed=args.seed, tol=args.tol,
            a=None if args.a is None else parse_setting(args.a, degrees),
            b=None if args.b is None else parse_setting(args.b, degrees),
        )
    if args.command == "chsh":
        quad = None
        if args.quad:
            angles = _floats(args.quad, 4, "--quad")
            quad = MeasurementQuad.from_angles(*(math.radians(t) if degrees else t for t in angles))
        table = None
        if args.table:
            c = _floats(args.table, 4, "--table")
            table = ((c[0], c[1]), (c[2], c[3]))
        return cmd_chsh(args.source, quad, args.search, table, args.tol, args.grid_steps, args.refine_iters)
    if args.command == "moment-check":
        instance = _resolve_instance(args.path)
        return cmd_moment_check(instance, args.tol, args.expect, source=args.path)
    if args.command == "simulate":
        return cmd_simulate(
            args.model, parse_setting(args.a, degrees), parse_setting(args.b, degrees),
            args.n, seed=args.seed, lanes=args.lanes,
        )
    if args.command == "spectral-demo":
        if args.preset:
            return cmd_spectral_demo(preset=args.preset, tol=args.tol)
        ops, state = load_operator_file(args.matrix_file)
        return cmd_spectral_demo(operators=ops, state=state, tol=args.tol)
    raise ValueError(f"unknown command {args.command!r}")


def _print_table(report: RunReport) -> None:
    err = sys.stderr
    if "error" in report.results:
        print(fmt_status(report.command, "error", report.results["error"]), file=err)
    if report.checks:
        df = pd.DataFrame([c.model_dump(by_alias=True) for c in report.checks])
        print(df.to_string(index=False), file=err)
        for c in report.checks:
            if not c.passed:
                print(fmt_check(report.command, c.name, c.passed, c.actual, c.expected, c.tolerance), file=err)
    print(fmt_status(report.command, "PASS" if report.overall_pass else "FAIL"), file=err)


def _parameters(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in ("json_only", "command")}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=getattr(logging, settings.log_level.upper(), logging.WARNING))
    args = build_parser().parse_args(argv)
    degrees = settings.degrees and not args.radians

    try:
        report = _run(args, degrees)
        code = EXIT_OK if report.overall_pass else EXIT_CHECK_FAILED
    except MarginalFeasibilityError as e:
        logger.warning(fmt_error(args.command, e))
        report, code = error_report(args.command, _parameters(args), e), EXIT_MARGINAL
    except (BellCheckError, ValueError, OSError) as e:
        logger.warning(fmt_error(args.command, e))
        report, code = error_report(args.command, _parameters(args), e), EXIT_USAGE
    except ArithmeticError as e:
        logger.error(fmt_error(args.command, e))
        report, code = error_report(args.command, _parameters(args), e), EXIT_CHECK_FAILED

    print(report.to_json())
    if not args.json_only:
        _print_table(report)
    Auditor().log("run", {"command": args.command, "exit_code": code, "overall_pass": report.overall_pass})
    return code


def run() -> None:
    sys.exit(main())
