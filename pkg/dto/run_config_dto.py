from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import settings

Window = Tuple[float, float, float, float]


def _default_window() -> Window:
    w = settings.portrait_window
    return (-w, w, -w, w)


class RunConfig(BaseModel):
    """Resolved options for one CLI invocation (flags over spec-file sections over settings)."""

    model_config = ConfigDict(extra="ignore")

    subcommand: str
    spec_path: Optional[Path] = None
    window: Window = Field(default_factory=_default_window)
    tol: float = Field(default_factory=lambda: settings.default_tol)
    tmax: float = Field(default_factory=lambda: settings.default_tmax)
    # None: check prints only; artifact commands fall back to ./out
    out_dir: Optional[Path] = None
    theorems: List[str] = Field(default_factory=lambda: ["t1", "t2", "t3", "t4"])
    seeds: List[Tuple[float, float]] = Field(default_factory=list)
    levels: List[float] = Field(default_factory=list)
    plane: str = "phase"
    bracket: Optional[Tuple[float, float]] = None
    scan: Optional[Tuple[float, float, int]] = None
    b_values: List[float] = Field(default_factory=list)
    a: Optional[float] = None
    parameters: Dict[str, str] = Field(default_factory=dict)
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)

    @field_validator("tol", "tmax")
    @classmethod
    def _positive(cls, v, info):
        if not v > 0:
            raise ValueError(f"{info.field_name} must be positive, got {v}")
        return v

    @field_validator("plane")
    @classmethod
    def _known_plane(cls, v):
        if v not in ("phase", "shifted"):
            raise ValueError(f"plane must be 'phase' or 'shifted', got {v!r}")
        return v

    @field_validator("theorems")
    @classmethod
    def _known_theorems(cls, v):
        bad = [t for t in v if t not in ("t1", "t2", "t3", "t4")]
        if bad:
            raise ValueError(f"unknown theorem selector(s) {bad}")
        return v

    @field_validator("b_values")
    @classmethod
    def _nonnegative_b(cls, v):
        if any(b < 0 for b in v):
            raise ValueError(f"b values must be >= 0, got {v}")
        return v

    @model_validator(mode="after")
    def _window_nonempty(self):
        xmin, xmax, ymin, ymax = self.window
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"window must be nonempty, got {self.window}")
        if self.bracket is not None and not (0 < self.bracket[0] < self.bracket[1]):
            raise ValueError(f"bracket must satisfy 0 < ylo < yhi, got {self.bracket}")
        if self.scan is not None and not (0 < self.scan[0] < self.scan[1] and self.scan[2] >= 2):
            raise ValueError(f"scan must satisfy 0 < ylo < yhi and points >= 2, got {self.scan}")
        return self

    @property
    def output_dir(self) -> Path:
        return self.out_dir if self.out_dir is not None else Path("out")

    @property
    def xrange(self) -> Tuple[float, float]:
        return self.window[0], self.window[1]
