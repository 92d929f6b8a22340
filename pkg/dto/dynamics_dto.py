from __future__ import annotations

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import settings


class IntegrationOptions(BaseModel):
    model_config = ConfigDict(extra="ignore", frozen=True)

    tol: float = Field(default_factory=lambda: settings.default_tol, gt=0.0)
    tmax: float = Field(default_factory=lambda: settings.default_tmax, gt=0.0)
    blowup_radius: float = Field(default_factory=lambda: settings.blowup_radius, gt=0.0)
    min_step_factor: float = Field(default_factory=lambda: settings.min_step_factor, gt=0.0)
    max_steps: int = Field(default_factory=lambda: settings.max_steps, gt=0)
    # positive y-axis crossings after which integration stops (None: never)
    stop_after_crossings: Optional[int] = None
    # constant step, no error control (order studies)
    fixed_step: Optional[float] = None

    @field_validator("stop_after_crossings")
    @classmethod
    def _positive_crossings(cls, v):
        if v is not None and v < 1:
            raise ValueError(f"stop_after_crossings must be >= 1, got {v}")
        return v

    @field_validator("fixed_step")
    @classmethod
    def _positive_step(cls, v):
        if v is not None and not v > 0:
            raise ValueError(f"fixed_step must be positive, got {v}")
        return v


class Stability(str, Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    NONHYPERBOLIC = "nonhyperbolic"


def classify_multiplier(multiplier: float, band: Optional[float] = None) -> Stability:
    eps = settings.multiplier_band if band is None else band
    if multiplier < 1.0 - eps:
        return Stability.ATTRACTING
    if multiplier > 1.0 + eps:
        return Stability.REPELLING
    return Stability.NONHYPERBOLIC


class CycleEstimate(BaseModel):
    y_star: float
    period: float
    closure_error: float
    multiplier: float
    stability: Stability
    amplitude: float = 0.0
    divergence_integral: float = 0.0
    iterations: int = 0


class ReturnMapSample(BaseModel):
    y0: float
    y1: Optional[float] = None
    # R(y0) - y0, None when the orbit did not return
    delta: Optional[float] = None
    period: Optional[float] = None
    termination: str = ""


class HopfRow(BaseModel):
    b: float
    verdict: str
    amplitude: Optional[float] = None
    y_star: Optional[float] = None
    multiplier: Optional[float] = None
    inner_trend: str = ""
    escape_from: Optional[float] = None
    escape_termination: str = ""
    outer_termination: str = ""
    note: str = ""
    error: Optional[str] = None


class FluxSummary(BaseModel):
    samples: int
    minimum: float
    maximum: float
    sign: str
    note: str = ""


class StarShapeResult(BaseModel):
    star_shaped: bool
    samples: int
    witness: Optional[List[float]] = None
