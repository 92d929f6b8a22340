"""
Subcommand bodies. Each takes a resolved RunConfig, writes its artifacts under
the output directory, prints its machine-readable result on `out` and returns
the process exit code.
"""
from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, TextIO, Tuple

import numpy as np
import pandas as pd
from tabulate import tabulate

from dto.dynamics_dto import IntegrationOptions
from dto.run_config_dto import RunConfig
from services.cli.options import UsageError
from services.dynamics.cycle_finder import BracketError, cycle_orbit, find_cycle
from services.dynamics.hopf_scan import hopf_scan
from services.dynamics.integrator import integrate
from services.dynamics.return_map import first_return, return_map_grid, sign_changes
from services.dynamics.trajectory import Trajectory
from services.system.equation import EquationFamily, EquationSpec, is_identically_zero
from services.system.isoclines import IsoclineBranch, infinity_isocline, isoclines
from services.theorems.registry import combined_exit_code, run_checks
from services.transforms.lienard import level_pullback
from utils.artifact_writer import curves_frame, dumps_json, trajectory_frame, write_csv, write_json
from utils.svg_renderer import curves_from_frame, write_svg
from utils.thread_pool import parallel_map

logger = logging.getLogger(__name__)

# dense-output samples per written trajectory (at least)
TRAJECTORY_SAMPLES = 2000
CYCLE_SAMPLES = 2048


def _options(cfg: RunConfig) -> IntegrationOptions:
    return IntegrationOptions(tol=cfg.tol, tmax=cfg.tmax)


# ───────────────────────────────────────────────
# check
# ───────────────────────────────────────────────

def cmd_check(cfg: RunConfig, spec: EquationSpec, *, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    # a single explicitly requested theorem must fit the equation's shape
    strict = len(cfg.theorems) == 1
    reports = run_checks(spec, cfg.theorems, strict=strict, max_workers=cfg.threads)
    print(dumps_json(reports), file=out)
    if cfg.out_dir is not None:
        write_json(cfg.out_dir, "check", reports)
    code = combined_exit_code(reports)
    logger.info(
        "check %s: %s -> exit %d",
        spec.describe(), ", ".join(f"{r.theorem}={r.overall.value}" for r in reports), code,
    )
    return code


# ───────────────────────────────────────────────
# portrait / isoclines
# ───────────────────────────────────────────────

def _to_plane(spec: EquationSpec, pts: np.ndarray, plane: str) -> np.ndarray:
    """Phase-plane points (u, v) in the requested plane; `shifted` is (u, v + F_1(u))."""
    if plane == "phase" or len(pts) == 0:
        return pts
    moved = np.array(pts, dtype=float, copy=True)
    moved[:, 1] = moved[:, 1] + spec.F1.evaluate_array(moved[:, 0])
    return moved


def _from_shifted(spec: EquationSpec, pts: np.ndarray, plane: str) -> np.ndarray:
    if plane == "shifted" or len(pts) == 0:
        return pts
    moved = np.array(pts, dtype=float, copy=True)
    moved[:, 1] = moved[:, 1] - spec.F1.evaluate_array(moved[:, 0])
    return moved


def _branch_id(br: IsoclineBranch, index: int) -> str:
    if br.sign == 0:
        return "finf"
    return f"iso{'+' if br.sign > 0 else '-'}{index:02d}"


def _isocline_curves(spec: EquationSpec, cfg: RunConfig, plane: str) -> Dict[str, np.ndarray]:
    curves: Dict[str, np.ndarray] = {}
    if spec.n == 2 and not is_identically_zero(spec.coefficient(2)):
        for i, br in enumerate(isoclines(spec, cfg.xrange)):
            curves[_branch_id(br, i)] = _from_shifted(spec, np.column_stack([br.x, br.y]), plane)
    inf = infinity_isocline(spec, cfg.xrange)
    curves["finf"] = _from_shifted(spec, np.column_stack([inf.x, inf.y]), plane)
    return curves


def _level_curves(spec: EquationSpec, cfg: RunConfig) -> Tuple[Dict[str, np.ndarray], List[List[object]]]:
    x_limit = max(abs(cfg.window[0]), abs(cfg.window[1]))
    curves: Dict[str, np.ndarray] = {}
    rows: List[List[object]] = []
    for lam in cfg.levels:
        curve = level_pullback(spec, lam, x_limit=x_limit)
        for k, piece in enumerate(curve.phase):
            curves[f"level{lam:g}-{k}"] = _to_plane(spec, piece, cfg.plane)
        rows.append([lam, curve.tag, len(curve.phase)])
    return curves, rows


@dataclass
class SeedRun:
    index: int
    seed: Tuple[float, float]
    trajectory: Optional[Trajectory] = None
    error: Optional[str] = None


def _sampled(traj: Trajectory) -> Tuple[np.ndarray, np.ndarray]:
    if traj.segments and traj.t[-1] > traj.t[0]:
        return traj.resample(max(len(traj.t), TRAJECTORY_SAMPLES))
    return traj.t, traj.states[:, :2]


def cmd_portrait(cfg: RunConfig, spec: EquationSpec, *, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    opts = _options(cfg)
    out_dir = cfg.output_dir
    indexed = list(enumerate(cfg.seeds))

    def run(item: Tuple[int, Tuple[float, float]]) -> SeedRun:
        index, seed = item
        return SeedRun(index=index, seed=seed, trajectory=integrate(spec, seed, opts))

    def failed(_i: int, item: Tuple[int, Tuple[float, float]], e: Exception) -> SeedRun:
        logger.warning("seed %s failed: %s", item[1], e)
        return SeedRun(index=item[0], seed=item[1], error=f"{type(e).__name__}: {e}")

    runs = parallel_map(indexed, run_item=run, max_workers=cfg.threads, on_error=failed, label="portrait seeds")

    svg_curves: List[Tuple[str, np.ndarray]] = []
    table: List[List[object]] = []
    for r in runs:
        if r.trajectory is None:
            table.append([r.index, f"{r.seed[0]:g},{r.seed[1]:g}", r.error, "", ""])
            continue
        ts, states = _sampled(r.trajectory)
        frame = trajectory_frame(ts, _to_plane(spec, np.asarray(states)[:, :2], cfg.plane))
        write_csv(
            out_dir,
            f"trajectory_{r.index:02d}",
            frame,
            header={
                "seed": f"{r.seed[0]!r},{r.seed[1]!r}",
                "plane": cfg.plane,
                "termination": r.trajectory.tag,
            },
        )
        svg_curves.append((f"traj{r.index:02d}", frame[["x", "y"]].to_numpy(dtype=float)))
        table.append([
            r.index, f"{r.seed[0]:g},{r.seed[1]:g}", r.trajectory.tag,
            len(r.trajectory.crossings), f"{r.trajectory.final_time:.6g}",
        ])

    overlays: Dict[str, np.ndarray] = {}
    level_rows: List[List[object]] = []
    if cfg.levels:
        levels, level_rows = _level_curves(spec, cfg)
        overlays.update(levels)
    overlays.update(_isocline_curves(spec, cfg, cfg.plane))
    frame = curves_frame(overlays)
    write_csv(out_dir, "portrait_curves", frame, header={"plane": cfg.plane})
    svg_curves = curves_from_frame(frame) + svg_curves

    write_svg(out_dir / "portrait.svg", svg_curves, cfg.window, title=spec.describe())
    print(tabulate(table, headers=["seed#", "seed", "termination", "crossings", "t_end"]), file=out)
    if level_rows:
        print(file=out)
        print(tabulate(level_rows, headers=["level", "tag", "pieces"]), file=out)
    logger.info("portrait of %s: %d seed(s), %d overlay curve(s) -> %s", spec.describe(), len(runs), len(overlays), out_dir)
    return 0


def cmd_isoclines(cfg: RunConfig, spec: EquationSpec, *, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    branches = isoclines(spec, cfg.xrange)
    inf = infinity_isocline(spec, cfg.xrange)
    curves: Dict[str, np.ndarray] = {}
    table: List[List[object]] = []
    for i, br in enumerate(branches + [inf]):
        cid = _branch_id(br, i)
        curves[cid] = np.column_stack([br.x, br.y])
        table.append([cid, br.label, f"{br.lo:.6g}", f"{br.hi:.6g}", len(br), "yes" if br.leftmost_upper else "", br.formula])
    frame = curves_frame(curves)
    write_csv(cfg.output_dir, "isoclines", frame, header={"plane": "shifted"})
    write_svg(cfg.output_dir / "isoclines.svg", curves_from_frame(frame), cfg.window, title=spec.describe())
    print(tabulate(table, headers=["curve", "branch", "lo", "hi", "points", "leftmost upper", "formula"]), file=out)
    return 0


# ───────────────────────────────────────────────
# cycle
# ───────────────────────────────────────────────

def scanned_bracket(spec: EquationSpec, scan: Tuple[float, float, int], opts: IntegrationOptions, *, max_workers: int) -> Tuple[float, float]:
    """Innermost sign change of R(y) - y on the scan grid."""
    lo, hi, points = scan
    samples = return_map_grid(spec, np.linspace(lo, hi, points), opts, max_workers=max_workers)
    brackets = sign_changes(samples)
    if brackets:
        a, b = brackets[0]
        if a < b:
            return a, b
        # exact hit on a grid point: bracket it with its neighbours
        ys = [s.y0 for s in samples]
        k = ys.index(a)
        return ys[max(0, k - 1)], ys[min(len(ys) - 1, k + 1)]
    returned = [s for s in samples if s.delta is not None]
    if not returned:
        # surfaces the NoReturnError of the innermost orbit
        first_return(spec, lo, opts)
        raise BracketError(lo, hi, math.nan, math.nan, reason="no orbit on the scan grid returned")
    first, last = returned[0], returned[-1]
    raise BracketError(first.y0, last.y0, first.delta, last.delta, reason="no sign change on the scan grid")


def cmd_cycle(cfg: RunConfig, spec: EquationSpec, *, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    opts = _options(cfg)
    if cfg.bracket is not None:
        bracket = cfg.bracket
    elif cfg.scan is not None:
        bracket = scanned_bracket(spec, cfg.scan, opts, max_workers=cfg.threads)
        logger.info("scan %s: bracket [%.6g, %.6g]", cfg.scan, *bracket)
    else:
        raise UsageError("cycle needs --bracket ylo,yhi or --scan ylo,yhi,points (or a [cycle] table in the spec file)")
    estimate = find_cycle(spec, bracket, opts)
    orbit = cycle_orbit(spec, estimate, CYCLE_SAMPLES, opts)

    frame = trajectory_frame(orbit[:, 0], orbit[:, 1:3])
    write_csv(
        cfg.output_dir,
        "cycle",
        frame,
        header={"y_star": repr(estimate.y_star), "period": repr(estimate.period), "stability": estimate.stability.value},
    )
    write_json(cfg.output_dir, "cycle", estimate)
    write_svg(
        cfg.output_dir / "cycle.svg",
        [("cycle", frame[["x", "y"]].to_numpy(dtype=float))],
        cfg.window,
        title=spec.describe(),
    )
    print(dumps_json(estimate), file=out)
    return 0


# ───────────────────────────────────────────────
# hopf-scan
# ───────────────────────────────────────────────

HOPF_COLUMNS = [
    "b", "verdict", "amplitude", "y_star", "multiplier", "inner_trend",
    "escape_from", "escape_termination", "outer_termination", "note", "error",
]


def cmd_hopf(cfg: RunConfig, family: EquationFamily, *, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    if not cfg.b_values:
        raise UsageError("hopf-scan needs --b-values (or a [hopf] b_values list in the spec file)")
    if "b" not in family.parameter_names:
        raise UsageError(f"hopf-scan needs a family with a parameter b, got {list(family.parameter_names)}")
    rows = hopf_scan(family, cfg.b_values, a=cfg.a, opts=_options(cfg), max_workers=cfg.threads)

    frame = pd.DataFrame([r.model_dump(mode="json") for r in rows], columns=HOPF_COLUMNS)
    write_csv(cfg.output_dir, "hopf_scan", frame, header={"a": cfg.a if cfg.a is not None else "spec"})
    print(
        tabulate(
            [[r.b, r.verdict, r.amplitude, r.multiplier, r.inner_trend, r.escape_from, r.outer_termination] for r in rows],
            headers=["b", "verdict", "amplitude", "multiplier", "inner trend", "escape from y", "outer seed"],
            floatfmt=".6g",
            missingval="-",
        ),
        file=out,
    )
    return 0
