#!/usr/bin/env python3
"""
cyclescope: limit-cycle analysis for  x'' + sum_l f_l(x) x'^l = 0.

  check      theorem checkers (exit 0 Applies / 1 DoesNotApply / 2 Indeterminate)
  portrait   trajectories, isoclines and energy levels as CSV + SVG
  cycle      locate a limit cycle inside a return-map bracket
  isoclines  zero-isocline branches and y = F_1(x)
  hopf-scan  cycle amplitude across a list of b values
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional

PROJECT_ROOT = Path(__file__).resolve().parent
sys.path.insert(0, str(PROJECT_ROOT))

from pydantic import ValidationError

from logging_setup import setup_logging
from services.cli.commands import cmd_check, cmd_cycle, cmd_hopf, cmd_isoclines, cmd_portrait
from services.cli.options import UsageError, resolve_run_config
from services.dynamics.cycle_finder import BracketError, CycleClosureError
from services.dynamics.return_map import NoReturnError
from services.dynamics.star_shape import DegenerateCycleError
from services.symbolic.antiderivative import QuadratureError
from services.symbolic.expression import EvaluationError
from services.symbolic.parser import ExpressionSyntaxError
from services.system.equation import SpecError
from services.system.isoclines import IsoclineError
from services.system.spec_io import family_from_document, read_document, spec_from_document
from services.theorems.common import TheoremInputError
from services.transforms.lienard import TransformError

logger = logging.getLogger("cyclescope")

EXIT_USAGE = 64
EXIT_NUMERIC = 65

USAGE_ERRORS = (
    UsageError,
    SpecError,
    ExpressionSyntaxError,
    ValidationError,
    IsoclineError,
    TransformError,
    TheoremInputError,
)
NUMERIC_ERRORS = (
    BracketError,
    NoReturnError,
    CycleClosureError,
    QuadratureError,
    EvaluationError,
    DegenerateCycleError,
)


class CliArgumentParser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this CLI reserves 0-2 for verdicts."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(
        prog="cyclescope",
        description="Existence, non-existence and numerics of limit cycles for x'' + sum f_l(x) x'^l = 0.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=CliArgumentParser)
    sub.required = True

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--spec", required=True, help="Equation spec file (TOML, or JSON by suffix)")
        p.add_argument(
            "--parameter", action="append", metavar="NAME=VALUE",
            help="Bind a family parameter; repeatable",
        )
        p.add_argument("--threads", type=int, default=None, help="Worker threads (default: CYCLESCOPE_THREADS)")
        p.add_argument("--out", default=None, help="Output directory (default: ./out)")

    def numerics(p: argparse.ArgumentParser) -> None:
        p.add_argument("--tol", type=float, default=None, help="Integrator tolerance")
        p.add_argument("--tmax", type=float, default=None, help="Integration time limit per orbit")

    p = sub.add_parser("check", help="Run theorem checkers")
    common(p)
    p.add_argument("--theorem", default=None, help="t1,t2,t3,t4 or all (default: all)")

    p = sub.add_parser("portrait", help="Phase portrait with overlays")
    common(p)
    numerics(p)
    p.add_argument("--seeds", default=None, help="Initial points 'x,y;x,y;...'; write --seeds=-1,2 when the value starts with '-'")
    p.add_argument("--window", default=None, help="W or xmin,xmax,ymin,ymax")
    p.add_argument("--levels", default=None, help="Energy levels of the unperturbed system, comma-separated")
    p.add_argument("--plane", choices=["phase", "shifted"], default=None)

    p = sub.add_parser("cycle", help="Locate a limit cycle")
    common(p)
    numerics(p)
    p.add_argument("--bracket", default=None, help="ylo,yhi on the positive y-axis")
    p.add_argument("--scan", default=None, help="ylo,yhi,points: take the innermost sign change of R(y)-y on this grid")
    p.add_argument("--window", default=None, help="SVG window: W or xmin,xmax,ymin,ymax")

    p = sub.add_parser("isoclines", help="Zero-isocline branches (n = 2)")
    common(p)
    p.add_argument("--window", default=None, help="W or xmin,xmax,ymin,ymax")

    p = sub.add_parser("hopf-scan", help="Cycle amplitude across b")
    common(p)
    numerics(p)
    p.add_argument("--b-values", dest="b_values", default=None, help="Comma-separated b values (>= 0)")
    p.add_argument("--a", type=float, default=None, help="Fixed value of a")

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, dispatch and map failures to exit codes; never raises for expected errors."""
    try:
        args = build_parser().parse_args(argv)
        doc = read_document(Path(args.spec))
        cfg = resolve_run_config(args, doc)
        logger.debug("resolved options: %s", cfg.model_dump_json())
        if args.command == "hopf-scan":
            family = family_from_document(doc)
            if cfg.parameters:
                family = dataclasses.replace(family, defaults={**family.defaults, **cfg.parameters})
            return cmd_hopf(cfg, family)
        spec = spec_from_document(doc, cfg.parameters)
        if args.command == "check":
            return cmd_check(cfg, spec)
        if args.command == "portrait":
            return cmd_portrait(cfg, spec)
        if args.command == "cycle":
            return cmd_cycle(cfg, spec)
        if args.command == "isoclines":
            return cmd_isoclines(cfg, spec)
        raise UsageError(f"unknown command {args.command!r}")
    except BracketError as e:
        print(f"error: {e}", file=sys.stderr)
        print(f"R({e.lo:.17g}) - {e.lo:.17g} = {e.r_lo:.17g}", file=sys.stderr)
        print(f"R({e.hi:.17g}) - {e.hi:.17g} = {e.r_hi:.17g}", file=sys.stderr)
        return EXIT_NUMERIC
    except NUMERIC_ERRORS as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except USAGE_ERRORS as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    setup_logging("cyclescope")
    sys.exit(run())


if __name__ == "__main__":
    main()
