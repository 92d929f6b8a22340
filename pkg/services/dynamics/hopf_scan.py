"""
Parameter scan for the Hopf family  x'' + (a x^2 - b) x' + (x^2 + 1) x'^2 + x^3 x'^3 + x = 0
(or any family with slots a and b). Per b: the trend of section crossings from
a small seed, a return-map grid grown outward from that orbit until R(y) - y
changes sign or orbits stop returning (the edge of the continuable region),
and the fate of a far seed.
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from dto.dynamics_dto import HopfRow, IntegrationOptions, ReturnMapSample
from services.dynamics.cycle_finder import find_cycle
from services.dynamics.integrator import integrate
from services.dynamics.return_map import return_map_grid, section_crossings
from services.system.equation import EquationFamily, EquationSpec
from utils.thread_pool import parallel_map

logger = logging.getLogger(__name__)

CROSSINGS_PER_SEED = 6


def crossing_trend(values: Sequence[float]) -> str:
    if len(values) < 2:
        return "none"
    d = np.diff(np.asarray(values, dtype=float))
    if np.all(d < 0):
        return "decreasing"
    if np.all(d > 0):
        return "increasing"
    return "mixed"


def outer_seed_point(rho: float) -> Tuple[float, float]:
    """Point at radius rho in the second quadrant, where x^3 y^3 < 0 drives y up superlinearly."""
    return -rho / math.sqrt(2.0), rho / math.sqrt(2.0)


class OutwardScan:
    """Result of growing the return-map grid away from the origin."""

    def __init__(self) -> None:
        self.samples: List[ReturnMapSample] = []
        self.bracket: Optional[Tuple[float, float]] = None
        # +1: R - y goes from positive to negative (attracting), -1: the reverse
        self.direction = 0
        self.edge: Optional[ReturnMapSample] = None


def outward_scan(
    spec: EquationSpec,
    y_start: float,
    y_limit: float,
    opts: IntegrationOptions,
    *,
    growth: Optional[float] = None,
    chunk: Optional[int] = None,
) -> OutwardScan:
    """
    Geometric grid y_start * growth^k, evaluated chunk by chunk, stopping at the
    first sign change of R(y) - y or at the first orbit that does not return.
    """
    growth = growth if growth is not None else settings.hopf_grid_growth
    chunk = chunk or settings.hopf_grid_points
    if y_start <= 0 or growth <= 1.0:
        raise ValueError(f"outward scan needs y_start > 0 and growth > 1, got {y_start}, {growth}")
    scan = OutwardScan()
    prev: Optional[ReturnMapSample] = None
    k = 0
    while True:
        ys = [y_start * growth ** j for j in range(k, k + chunk) if y_start * growth ** j <= y_limit]
        if not ys:
            return scan
        k += chunk
        for s in return_map_grid(spec, ys, opts, max_workers=1):
            scan.samples.append(s)
            if s.delta is None:
                scan.edge = s
                return scan
            if s.delta == 0.0:
                continue
            if prev is not None and prev.delta * s.delta < 0:
                scan.bracket = (prev.y0, s.y0)
                scan.direction = 1 if prev.delta > 0 else -1
                return scan
            prev = s


def scan_one(
    spec: EquationSpec,
    b: float,
    opts: Optional[IntegrationOptions] = None,
    *,
    inner_seed: Optional[float] = None,
    outer_seed: Optional[float] = None,
) -> HopfRow:
    opts = opts or IntegrationOptions()
    rho_in = inner_seed if inner_seed is not None else settings.hopf_inner_seed
    rho_out = outer_seed if outer_seed is not None else settings.hopf_outer_seed

    inner = section_crossings(spec, (rho_in, 0.0), CROSSINGS_PER_SEED, opts)
    outer_traj = integrate(spec, outer_seed_point(rho_out), opts)
    row = dict(b=b, inner_trend=crossing_trend(inner), outer_termination=outer_traj.tag)
    if not inner:
        return HopfRow(verdict="no-cycle", error="inner seed orbit did not reach the section", **row)

    scan = outward_scan(spec, inner[0], rho_out, opts)
    if scan.edge is not None:
        row.update(escape_from=scan.edge.y0, escape_termination=scan.edge.termination)

    if scan.bracket is None:
        last = scan.samples[-1].y0 if scan.samples else inner[0]
        logger.info("b=%g: R(y)-y keeps one sign on [%.4g, %.4g], escape from %s", b, inner[0], last, row.get("escape_from"))
        return HopfRow(verdict="no-cycle", **row)
    if scan.direction < 0:
        # an orbit repelling from outside around an attracting origin is not the branch born at b = 0
        note = f"repelling closed orbit between y={scan.bracket[0]:.6g} and {scan.bracket[1]:.6g}"
        logger.info("b=%g: %s", b, note)
        return HopfRow(verdict="no-cycle", note=note, **row)

    cycle = find_cycle(spec, scan.bracket, opts)
    logger.info("b=%g: cycle with amplitude %.6g", b, cycle.amplitude)
    return HopfRow(
        verdict="cycle",
        amplitude=cycle.amplitude,
        y_star=cycle.y_star,
        multiplier=cycle.multiplier,
        **row,
    )


def hopf_scan(
    family: EquationFamily,
    b_values: Sequence[float],
    *,
    a: Optional[float] = None,
    opts: Optional[IntegrationOptions] = None,
    max_workers: Optional[int] = None,
) -> List[HopfRow]:
    """One row per b, in input order; a failing b becomes a row with `error` set."""
    if not b_values:
        raise ValueError("hopf scan needs at least one b value")
    if any(b < 0 for b in b_values):
        raise ValueError(f"b values must be >= 0, got {list(b_values)}")
    fixed = {} if a is None else {"a": a}

    def run(b: float) -> HopfRow:
        spec = family.instantiate(b=b, **fixed)
        return scan_one(spec, b, opts)

    def failed(_index: int, b: float, e: Exception) -> HopfRow:
        logger.warning("hopf scan failed at b=%g: %s", b, e)
        return HopfRow(b=b, verdict="error", error=f"{type(e).__name__}: {e}")

    return parallel_map(list(b_values), run_item=run, max_workers=max_workers, on_error=failed, label="hopf scan")
