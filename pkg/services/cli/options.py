from __future__ import annotations

import argparse
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from dto.equation_dto import EquationSpecDocument
from dto.run_config_dto import RunConfig


class UsageError(ValueError):
    """Bad command-line usage; the CLI exits 64."""


# ───────────────────────────────────────────────
# Flag value parsers
# ───────────────────────────────────────────────

def parse_floats(raw: str, *, what: str) -> List[float]:
    tokens = [t.strip() for t in str(raw or "").replace(";", ",").split(",") if t.strip()]
    try:
        return [float(t) for t in tokens]
    except ValueError as e:
        raise UsageError(f"{what}: expected comma-separated numbers, got {raw!r}") from e


def parse_pair(raw: str, *, what: str) -> Tuple[float, float]:
    values = parse_floats(raw, what=what)
    if len(values) != 2:
        raise UsageError(f"{what}: expected two numbers, got {raw!r}")
    return values[0], values[1]


def parse_scan(raw: str) -> Tuple[float, float, int]:
    values = parse_floats(raw, what="--scan")
    if len(values) != 3 or values[2] != int(values[2]):
        raise UsageError(f"--scan: expected ylo,yhi,points, got {raw!r}")
    return values[0], values[1], int(values[2])


def parse_window(raw: str) -> Tuple[float, float, float, float]:
    """`W` (square [-W,W]^2) or `xmin,xmax,ymin,ymax`."""
    values = parse_floats(raw, what="--window")
    if len(values) == 1:
        w = abs(values[0])
        return (-w, w, -w, w)
    if len(values) != 4:
        raise UsageError(f"--window: expected W or xmin,xmax,ymin,ymax, got {raw!r}")
    return values[0], values[1], values[2], values[3]


def parse_seeds(raw: str) -> List[Tuple[float, float]]:
    """`x,y;x,y;...`."""
    seeds = []
    for part in str(raw or "").split(";"):
        if part.strip():
            seeds.append(parse_pair(part, what="--seeds"))
    if not seeds:
        raise UsageError(f"--seeds: no seed in {raw!r}")
    return seeds


def parse_parameters(items: Optional[Sequence[str]]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in items or []:
        name, sep, value = str(item).partition("=")
        if not sep or not name.strip() or not value.strip():
            raise UsageError(f"--parameter: expected name=value, got {item!r}")
        try:
            Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"--parameter {name.strip()}: {value.strip()!r} is not a number") from e
        out[name.strip()] = value.strip()
    return out


def parse_theorems(raw: Optional[str]) -> Optional[List[str]]:
    if raw is None:
        return None
    tokens = [t.strip().lower() for t in str(raw).split(",") if t.strip()]
    if not tokens or tokens == ["all"]:
        return ["t1", "t2", "t3", "t4"]
    return tokens


# ───────────────────────────────────────────────
# Resolution: flags > spec-file sections > settings
# ───────────────────────────────────────────────

def _window_from_list(values: Optional[List[float]]) -> Optional[Tuple[float, float, float, float]]:
    if not values:
        return None
    if len(values) == 1:
        w = abs(float(values[0]))
        return (-w, w, -w, w)
    if len(values) != 4:
        raise UsageError(f"portrait.window must have 1 or 4 numbers, got {values}")
    return tuple(float(v) for v in values)  # type: ignore[return-value]


def resolve_run_config(args: argparse.Namespace, doc: Optional[EquationSpecDocument]) -> RunConfig:
    fields: Dict[str, object] = {"subcommand": args.command}
    if getattr(args, "spec", None):
        fields["spec_path"] = Path(args.spec)

    portrait = doc.portrait if doc is not None else None
    cycle = doc.cycle if doc is not None else None
    hopf = doc.hopf if doc is not None else None

    window = None
    if getattr(args, "window", None):
        window = parse_window(args.window)
    elif portrait is not None:
        window = _window_from_list(portrait.window)
    if window is not None:
        fields["window"] = window

    if getattr(args, "tol", None) is not None:
        fields["tol"] = args.tol

    tmax = getattr(args, "tmax", None)
    if tmax is None and args.command == "portrait" and portrait is not None:
        tmax = portrait.tmax
    if tmax is None and args.command == "cycle" and cycle is not None:
        tmax = cycle.tmax
    if tmax is not None:
        fields["tmax"] = tmax

    if getattr(args, "out", None):
        fields["out_dir"] = Path(args.out)

    theorems = parse_theorems(getattr(args, "theorem", None))
    if theorems is not None:
        fields["theorems"] = theorems

    if getattr(args, "seeds", None):
        fields["seeds"] = parse_seeds(args.seeds)
    elif portrait is not None and portrait.seeds:
        bad = [s for s in portrait.seeds if len(s) != 2]
        if bad:
            raise UsageError(f"portrait.seeds entries must be [x, y] pairs, got {bad}")
        fields["seeds"] = [(float(s[0]), float(s[1])) for s in portrait.seeds]

    if getattr(args, "levels", None):
        fields["levels"] = parse_floats(args.levels, what="--levels")
    elif portrait is not None:
        fields["levels"] = list(portrait.levels)

    if getattr(args, "plane", None):
        fields["plane"] = args.plane
    elif portrait is not None:
        fields["plane"] = portrait.plane

    if getattr(args, "bracket", None):
        fields["bracket"] = parse_pair(args.bracket, what="--bracket")
    elif cycle is not None and cycle.bracket and not getattr(args, "scan", None):
        if len(cycle.bracket) != 2:
            raise UsageError(f"cycle.bracket must have two numbers, got {cycle.bracket}")
        fields["bracket"] = (float(cycle.bracket[0]), float(cycle.bracket[1]))

    if getattr(args, "scan", None):
        fields["scan"] = parse_scan(args.scan)
    elif cycle is not None and cycle.scan:
        if len(cycle.scan) != 3:
            raise UsageError(f"cycle.scan must be [ylo, yhi, points], got {cycle.scan}")
        fields["scan"] = (float(cycle.scan[0]), float(cycle.scan[1]), int(cycle.scan[2]))

    if getattr(args, "b_values", None):
        fields["b_values"] = parse_floats(args.b_values, what="--b-values")
    elif hopf is not None:
        fields["b_values"] = list(hopf.b_values)

    a = getattr(args, "a", None)
    if a is None and hopf is not None:
        a = hopf.a
    if a is not None:
        fields["a"] = a

    fields["parameters"] = parse_parameters(getattr(args, "parameter", None))
    if getattr(args, "threads", None) is not None:
        fields["threads"] = args.threads

    try:
        return RunConfig.model_validate(fields)
    except ValidationError as e:
        raise UsageError(f"invalid options: {e}") from e
