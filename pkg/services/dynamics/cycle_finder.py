"""
Limit-cycle location on the positive y-axis section: bisection on R(y) - y
down to a narrow bracket, then safeguarded secant steps, then a closure check
and the Floquet multiplier exp(integral of div) along the refined orbit.
"""
from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from dto.dynamics_dto import CycleEstimate, IntegrationOptions, classify_multiplier
from services.dynamics.return_map import (
    FirstReturn,
    first_return,
    return_map_derivative,
    return_map_grid,
    sign_changes,
)
from services.system.equation import EquationSpec

logger = logging.getLogger(__name__)

MAX_SECANT_ITERATIONS = 60


class BracketError(RuntimeError):
    """R(y) - y has no resolvable sign change on the bracket."""

    def __init__(self, lo: float, hi: float, r_lo: float, r_hi: float, reason: str = "no sign change"):
        self.lo, self.hi = lo, hi
        self.r_lo, self.r_hi = r_lo, r_hi
        super().__init__(
            f"{reason} on [{lo:.17g}, {hi:.17g}]: R(lo)-lo={r_lo:.17g}, R(hi)-hi={r_hi:.17g}"
        )


class CycleClosureError(RuntimeError):
    def __init__(self, y_star: float, closure_error: float, tol: float):
        self.y_star = y_star
        self.closure_error = closure_error
        super().__init__(f"orbit from (0, {y_star:.17g}) misses itself by {closure_error:.3g} > {tol:.3g}")


def _noise_floor(opts: IntegrationOptions, y: float) -> float:
    # R(y) - y below this is indistinguishable from integration error
    return 1e3 * opts.tol * max(1.0, abs(y))


def _secant_refine(
    spec: EquationSpec,
    a: float,
    ra: float,
    b: float,
    rb: float,
    opts: IntegrationOptions,
    tol: float,
) -> Tuple[float, int]:
    """Illinois-weighted secant on a sign-changing bracket [a, b]."""
    y_prev = a
    y = b
    for it in range(1, MAX_SECANT_ITERATIONS + 1):
        y = b - rb * (b - a) / (rb - ra)
        if not (min(a, b) < y < max(a, b)):
            y = 0.5 * (a + b)
        r = first_return(spec, y, opts).delta
        logger.debug("secant %d: y=%.17g, R(y)-y=%.3e", it, y, r)
        if r == 0.0 or abs(y - y_prev) <= tol * max(1.0, y):
            return y, it
        if r * rb < 0:
            a, ra = b, rb
        else:
            ra *= 0.5
        b, rb = y, r
        y_prev = y
        if abs(b - a) <= tol * max(1.0, y):
            return y, it
    return y, MAX_SECANT_ITERATIONS


def find_cycle(
    spec: EquationSpec,
    bracket: Tuple[float, float],
    opts: Optional[IntegrationOptions] = None,
    *,
    bisection_width: Optional[float] = None,
    secant_tol: Optional[float] = None,
    closure_tol: Optional[float] = None,
) -> CycleEstimate:
    """
    Refine a fixed point of the return map inside `bracket`.

    Raises BracketError when the endpoint values do not change sign,
    NoReturnError when an orbit inside the bracket does not come back, and
    CycleClosureError when the refined orbit does not close to `closure_tol`.
    """
    opts = opts or IntegrationOptions()
    width = bisection_width if bisection_width is not None else settings.bisection_width
    stol = secant_tol if secant_tol is not None else settings.secant_tol
    ctol = closure_tol if closure_tol is not None else settings.closure_tol

    lo, hi = sorted(float(v) for v in bracket)
    if not lo > 0:
        raise ValueError(f"bracket must lie on the positive y-axis, got {bracket}")
    r_lo = first_return(spec, lo, opts).delta
    r_hi = first_return(spec, hi, opts).delta
    if abs(r_lo) <= _noise_floor(opts, lo) and abs(r_hi) <= _noise_floor(opts, hi):
        raise BracketError(lo, hi, r_lo, r_hi, reason="R(y) - y vanishes to integration accuracy at both ends")
    if r_lo * r_hi > 0:
        raise BracketError(lo, hi, r_lo, r_hi)
    logger.info("locating cycle in [%.6g, %.6g]: R-y = %.3e, %.3e", lo, hi, r_lo, r_hi)

    iterations = 0
    if r_lo == 0.0:
        y_star = lo
    elif r_hi == 0.0:
        y_star = hi
    else:
        a, ra, b, rb = lo, r_lo, hi, r_hi
        while b - a > width:
            mid = 0.5 * (a + b)
            rm = first_return(spec, mid, opts).delta
            iterations += 1
            if rm == 0.0:
                a = b = mid
                ra = rb = 0.0
                break
            if rm * ra < 0:
                b, rb = mid, rm
            else:
                a, ra = mid, rm
        if a == b:
            y_star = a
        else:
            y_star, extra = _secant_refine(spec, a, ra, b, rb, opts, stol)
            iterations += extra

    ret = first_return(spec, y_star, opts)
    closure = abs(ret.delta)
    if closure > ctol:
        raise CycleClosureError(y_star, closure, ctol)
    estimate = _estimate_from_return(ret, iterations)
    logger.info(
        "cycle at y*=%.12g: T=%.8g, m=%.6g (%s), amplitude %.6g",
        estimate.y_star, estimate.period, estimate.multiplier, estimate.stability.value, estimate.amplitude,
    )
    return estimate


def _estimate_from_return(ret: FirstReturn, iterations: int) -> CycleEstimate:
    traj = ret.trajectory
    xs = traj.x
    if traj.segments:
        _, dense = traj.resample(max(len(traj.t), 2048), 0.0, ret.period)
        xs = np.concatenate([xs, dense[:, 0]])
    return CycleEstimate(
        y_star=ret.y0,
        period=ret.period,
        closure_error=abs(ret.delta),
        multiplier=ret.multiplier,
        stability=classify_multiplier(ret.multiplier),
        amplitude=float(np.max(np.abs(xs))),
        divergence_integral=ret.divergence_integral,
        iterations=iterations,
    )


def cycle_orbit(
    spec: EquationSpec,
    cycle: CycleEstimate,
    samples: int = 1024,
    opts: Optional[IntegrationOptions] = None,
) -> np.ndarray:
    """`samples` points (t, x, y) equally spaced in time over one period of the located cycle."""
    if samples < 3:
        raise ValueError(f"need at least 3 samples, got {samples}")
    ret = first_return(spec, cycle.y_star, opts)
    ts, states = ret.trajectory.resample(samples, 0.0, ret.period)
    return np.column_stack([ts, states[:, 0], states[:, 1]])


def scan_brackets(
    spec: EquationSpec,
    ys: Sequence[float],
    opts: Optional[IntegrationOptions] = None,
    *,
    max_workers: Optional[int] = None,
) -> List[Tuple[float, float]]:
    """Sign-change brackets of R(y) - y over a grid of section points."""
    samples = return_map_grid(spec, ys, opts, max_workers=max_workers)
    return sign_changes(samples)


def find_cycles(
    spec: EquationSpec,
    ys: Sequence[float],
    opts: Optional[IntegrationOptions] = None,
    *,
    max_workers: Optional[int] = None,
) -> List[CycleEstimate]:
    """Every cycle whose section point is bracketed by the grid, innermost first."""
    out: List[CycleEstimate] = []
    for lo, hi in scan_brackets(spec, ys, opts, max_workers=max_workers):
        if lo == hi:
            ret = first_return(spec, lo, opts)
            out.append(_estimate_from_return(ret, 0))
            continue
        out.append(find_cycle(spec, (lo, hi), opts))
    return out


def multiplier_from_derivative(
    spec: EquationSpec,
    cycle: CycleEstimate,
    opts: Optional[IntegrationOptions] = None,
) -> float:
    """dR/dy at y*, an independent estimate of the Floquet multiplier."""
    return return_map_derivative(spec, cycle.y_star, opts)
