from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from dto.dynamics_dto import IntegrationOptions, ReturnMapSample
from services.dynamics.integrator import integrate
from services.dynamics.trajectory import Termination, Trajectory
from services.system.equation import EquationSpec
from utils.thread_pool import parallel_map

logger = logging.getLogger(__name__)


class NoReturnError(RuntimeError):
    """The orbit from (0, y0) did not come back to the positive y-axis."""

    def __init__(self, y0: float, trajectory: Trajectory):
        self.y0 = y0
        self.termination = trajectory.termination
        self.tag = trajectory.tag
        super().__init__(f"no return from (0, {y0:.17g}): {self.tag}")


@dataclass(frozen=True)
class FirstReturn:
    y0: float
    y1: float
    period: float
    # integral of the divergence over one revolution
    divergence_integral: float
    trajectory: Trajectory

    @property
    def delta(self) -> float:
        return self.y1 - self.y0

    @property
    def multiplier(self) -> float:
        try:
            return math.exp(self.divergence_integral)
        except OverflowError:
            return math.inf


def first_return(spec: EquationSpec, y0: float, opts: Optional[IntegrationOptions] = None) -> FirstReturn:
    """One clockwise revolution from (0, y0), y0 > 0, back to the positive y-axis."""
    if not y0 > 0:
        raise ValueError(f"return map needs y0 > 0, got {y0}")
    opts = (opts or IntegrationOptions()).model_copy(update={"stop_after_crossings": 1})
    traj = integrate(spec, (0.0, y0), opts, with_divergence=True)
    if traj.termination != Termination.SECTION_HIT:
        raise NoReturnError(y0, traj)
    c = traj.crossings[-1]
    return FirstReturn(y0=y0, y1=c.y, period=c.t, divergence_integral=float(c.state[2]), trajectory=traj)


def return_map(spec: EquationSpec, y0: float, opts: Optional[IntegrationOptions] = None) -> float:
    return first_return(spec, y0, opts).y1


def section_crossings(
    spec: EquationSpec,
    initial: Sequence[float],
    count: int,
    opts: Optional[IntegrationOptions] = None,
) -> List[float]:
    """y-values of the first `count` positive y-axis crossings (fewer if the orbit stops earlier)."""
    opts = (opts or IntegrationOptions()).model_copy(update={"stop_after_crossings": count})
    traj = integrate(spec, initial, opts)
    if len(traj.crossings) < count:
        logger.info("only %d of %d crossings from %s: %s", len(traj.crossings), count, list(initial), traj.tag)
    return [c.y for c in traj.crossings]


def return_map_grid(
    spec: EquationSpec,
    ys: Sequence[float],
    opts: Optional[IntegrationOptions] = None,
    *,
    max_workers: Optional[int] = None,
) -> List[ReturnMapSample]:
    """R(y) - y on a grid; orbits that do not return are kept as tagged samples."""

    def run(y0: float) -> ReturnMapSample:
        ret = first_return(spec, y0, opts)
        return ReturnMapSample(y0=y0, y1=ret.y1, delta=ret.delta, period=ret.period, termination="SectionHit")

    def failed(_index: int, y0: float, e: Exception) -> ReturnMapSample:
        if not isinstance(e, NoReturnError):
            raise e
        return ReturnMapSample(y0=y0, termination=e.tag)

    return parallel_map(list(ys), run_item=run, max_workers=max_workers, on_error=failed, label="return map grid")


def sign_changes(samples: Sequence[ReturnMapSample]) -> List[Tuple[float, float]]:
    """Brackets (y_a, y_b) between consecutive returning samples where R(y) - y changes sign."""
    out: List[Tuple[float, float]] = []
    prev: Optional[ReturnMapSample] = None
    for s in samples:
        if s.delta is None:
            prev = None
            continue
        if s.delta == 0.0:
            out.append((s.y0, s.y0))
        elif prev is not None and prev.delta != 0.0 and prev.delta * s.delta < 0:
            out.append((prev.y0, s.y0))
        prev = s
    return out


def return_map_derivative(
    spec: EquationSpec,
    y: float,
    opts: Optional[IntegrationOptions] = None,
    *,
    step: Optional[float] = None,
) -> float:
    """Central difference dR/dy at y."""
    h = step if step is not None else 1e-4 * max(1.0, y)
    h = min(h, 0.5 * y)
    return (return_map(spec, y + h, opts) - return_map(spec, y - h, opts)) / (2 * h)
