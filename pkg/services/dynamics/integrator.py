"""
Dormand-Prince 5(4) with FSAL, max-norm step-size control, the 4th-order free
interpolant for dense output, and positive y-axis section detection.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from dto.dynamics_dto import IntegrationOptions
from services.dynamics.trajectory import Crossing, DenseSegment, IntegratorStats, Termination, Trajectory
from services.system.equation import EquationSpec

logger = logging.getLogger(__name__)

RHS = Callable[[float, np.ndarray], np.ndarray]

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# 5th minus 4th order weights, last entry for the FSAL stage
E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXPONENT = -1 / 5
# per-step tolerance relative to opts.tol; global error grows with the step count
LOCAL_TOL_RATIO = 1e-2


def _error_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v)))


def _error_scale(tol: float, *states: np.ndarray) -> np.ndarray:
    local = tol * LOCAL_TOL_RATIO
    return local + local * np.max(np.abs(np.vstack(states)), axis=0)


def _initial_step(rhs: RHS, t0: float, s0: np.ndarray, f0: np.ndarray, tol: float) -> float:
    scale = _error_scale(tol, s0)
    d0 = _error_norm(s0 / scale)
    d1 = _error_norm(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(t0 + h0, s0 + h0 * f0)
    d2 = _error_norm((f1 - f0) / scale) / h0
    if not math.isfinite(d2):
        return h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _stages(rhs: RHS, t: float, s: np.ndarray, f0: np.ndarray, h: float):
    K = np.empty((7, s.size))
    K[0] = f0
    for i in range(1, 6):
        K[i] = rhs(t + C[i] * h, s + h * (A[i] @ K[:i]))
    s_new = s + h * (B @ K[:6])
    K[6] = rhs(t + h, s_new)
    return s_new, K


def _section_crossing(seg: DenseSegment, g_old: float, g_new: float) -> Optional[Crossing]:
    """Up-crossing of x through 0 with y > 0 inside one step."""
    if not (g_old < 0.0 <= g_new):
        return None
    if g_new == 0.0:
        t_c = seg.t0 + seg.h
    else:
        theta = brentq(
            lambda th: seg(seg.t0 + th * seg.h)[0], 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps
        )
        t_c = seg.t0 + theta * seg.h
    state = seg(t_c)
    state[0] = 0.0 if abs(state[0]) <= 1e-10 else state[0]
    if state[1] <= 0.0:
        return None
    return Crossing(t=float(t_c), state=state)


def solve(rhs: RHS, initial: Sequence[float], opts: Optional[IntegrationOptions] = None, *, t0: float = 0.0) -> Trajectory:
    """
    Integrate s' = rhs(t, s) from `initial` until the first of: tmax reached,
    the requested number of section crossings, |(s_0, s_1)| above the blow-up
    radius, step collapse, or the step budget.
    """
    opts = opts or IntegrationOptions()
    s = np.asarray(initial, dtype=float).copy()
    t = float(t0)
    t_end = t + opts.tmax
    stats = IntegratorStats()

    f = rhs(t, s)
    stats.evaluations += 1
    if opts.fixed_step is not None:
        h = opts.fixed_step
    else:
        h = _initial_step(rhs, t, s, f, opts.tol)
        stats.evaluations += 1

    ts = [t]
    states = [s.copy()]
    crossings = []
    segments = []
    termination = Termination.TIME_LIMIT

    while True:
        if t >= t_end:
            termination = Termination.TIME_LIMIT
            break
        if stats.accepted >= opts.max_steps:
            termination = Termination.MAX_STEPS
            break
        if opts.fixed_step is None and h < opts.min_step_factor * max(1.0, abs(t)):
            termination = Termination.STEP_COLLAPSE
            break
        last = h >= t_end - t
        if last:
            h = t_end - t

        rejected_once = False
        while True:
            s_new, K = _stages(rhs, t, s, f, h)
            stats.evaluations += 6
            if opts.fixed_step is not None:
                if not np.all(np.isfinite(s_new)):
                    termination = Termination.BLOW_UP
                    break
                break
            scale = _error_scale(opts.tol, s, s_new)
            err = _error_norm(h * (K.T @ E) / scale)
            if math.isfinite(err) and err < 1.0:
                factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** ERROR_EXPONENT)
                if rejected_once:
                    factor = min(1.0, factor)
                h_next = h * factor
                break
            stats.rejected += 1
            rejected_once = True
            shrink = MIN_FACTOR if not math.isfinite(err) else max(MIN_FACTOR, SAFETY * err ** ERROR_EXPONENT)
            h *= shrink
            last = False
            if h < opts.min_step_factor * max(1.0, abs(t)):
                termination = Termination.STEP_COLLAPSE
                break

        if termination in (Termination.STEP_COLLAPSE, Termination.BLOW_UP):
            break
        if opts.fixed_step is not None:
            h_next = opts.fixed_step

        seg = DenseSegment(t0=t, h=h, s0=s.copy(), Q=K.T @ P)
        segments.append(seg)
        stats.record(h)

        crossing = _section_crossing(seg, float(s[0]), float(s_new[0]))
        if crossing is not None:
            crossings.append(crossing)
            if opts.stop_after_crossings is not None and len(crossings) >= opts.stop_after_crossings:
                if crossing.t > ts[-1]:
                    ts.append(crossing.t)
                    states.append(crossing.state.copy())
                termination = Termination.SECTION_HIT
                break

        t = t_end if last else t + h
        s = s_new
        f = K[6]
        ts.append(t)
        states.append(s.copy())
        h = h_next

        if not np.all(np.isfinite(s)) or math.hypot(s[0], s[1]) > opts.blowup_radius:
            termination = Termination.BLOW_UP
            break

    # a step collapse on an outward-moving orbit is finite-time escape
    if termination == Termination.STEP_COLLAPSE and math.hypot(s[0], s[1]) > math.hypot(states[0][0], states[0][1]):
        termination = Termination.BLOW_UP

    traj = Trajectory(
        t=np.array(ts),
        states=np.array(states),
        termination=termination,
        crossings=crossings,
        stats=stats,
        segments=segments,
    )
    logger.debug(
        "integration from %s: %s after %d steps (%d rejected)",
        np.asarray(initial).tolist(), traj.tag, stats.accepted, stats.rejected,
    )
    return traj


def integrate(
    spec: EquationSpec,
    initial: Sequence[float],
    opts: Optional[IntegrationOptions] = None,
    *,
    with_divergence: bool = False,
) -> Trajectory:
    """Orbit of x' = y, y' = -sum f_l(x) y^l; with_divergence appends the running integral of the divergence."""
    state = list(initial)[:2]
    if with_divergence:
        state.append(0.0)
    return solve(spec.rhs(with_divergence=with_divergence), state, opts)
