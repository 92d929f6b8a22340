from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np


class Termination(str, Enum):
    TIME_LIMIT = "TimeLimit"
    SECTION_HIT = "SectionHit"
    BLOW_UP = "BlowUp"
    STEP_COLLAPSE = "StepCollapse"
    MAX_STEPS = "MaxSteps"


@dataclass(frozen=True)
class Crossing:
    """Passage through the positive y-axis {x = 0, y > 0} with x increasing."""

    t: float
    state: np.ndarray

    @property
    def y(self) -> float:
        return float(self.state[1])


@dataclass
class IntegratorStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0
    min_step: float = float("inf")
    max_step: float = 0.0

    def record(self, h: float) -> None:
        self.accepted += 1
        self.min_step = min(self.min_step, h)
        self.max_step = max(self.max_step, h)


@dataclass(frozen=True)
class DenseSegment:
    """Quartic interpolant of one accepted step: s(t0 + theta*h) = s0 + h * Q @ [theta, theta^2, theta^3, theta^4]."""

    t0: float
    h: float
    s0: np.ndarray
    Q: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        theta = (t - self.t0) / self.h
        powers = np.cumprod(np.full(4, theta))
        return self.s0 + self.h * (self.Q @ powers)


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    termination: Termination
    crossings: List[Crossing] = field(default_factory=list)
    stats: IntegratorStats = field(default_factory=IntegratorStats)
    segments: List[DenseSegment] = field(default_factory=list, repr=False)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def final_time(self) -> float:
        return float(self.t[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def tag(self) -> str:
        if self.termination == Termination.BLOW_UP or self.termination == Termination.STEP_COLLAPSE:
            x, y = self.final_state[:2]
            return f"{self.termination.value}(t*={self.final_time:.6g}, last=({x:.6g}, {y:.6g}))"
        if self.termination == Termination.SECTION_HIT and self.crossings:
            c = self.crossings[-1]
            return f"SectionHit(t={c.t:.6g}, y={c.y:.17g})"
        return f"{self.termination.value}(t={self.final_time:.6g})"

    def state_at(self, t: float) -> np.ndarray:
        if not self.segments:
            raise ValueError("trajectory carries no dense output")
        if not (self.t[0] <= t <= self.t[-1]):
            raise ValueError(f"t={t!r} outside [{self.t[0]!r}, {self.t[-1]!r}]")
        starts = [seg.t0 for seg in self.segments]
        k = max(0, bisect.bisect_right(starts, t) - 1)
        return self.segments[k](t)

    def resample(self, n: int, t0: Optional[float] = None, t1: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """n equally spaced times over [t0, t1] (default: the whole trajectory), via dense output."""
        a = float(self.t[0] if t0 is None else t0)
        b = float(self.t[-1] if t1 is None else t1)
        ts = np.linspace(a, b, n)
        return ts, np.array([self.state_at(float(s)) for s in ts])
