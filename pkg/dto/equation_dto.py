from __future__ import annotations

from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

ParamValue = Union[int, float, str]


class QuadrupleDocument(BaseModel):
    """p(x) x'' + p(x) q1(x) x' + q2(x) x'^2 + r(x) = 0."""

    model_config = ConfigDict(extra="ignore")
    p: str
    q1: str
    q2: str
    r: str


class PortraitSection(BaseModel):
    model_config = ConfigDict(extra="ignore")
    seeds: List[List[float]] = Field(default_factory=list)
    window: Optional[List[float]] = None
    levels: List[float] = Field(default_factory=list)
    plane: str = "phase"
    tmax: Optional[float] = None


class CycleSection(BaseModel):
    model_config = ConfigDict(extra="ignore")
    bracket: Optional[List[float]] = None
    # [ylo, yhi, points]: bracket taken from the innermost sign change on this grid
    scan: Optional[List[float]] = None
    tmax: Optional[float] = None


class HopfSection(BaseModel):
    model_config = ConfigDict(extra="ignore")
    a: Optional[float] = None
    b_values: List[float] = Field(default_factory=list)


class EquationSpecDocument(BaseModel):
    """
    On-disk form of an equation  x'' + sum_l f_l(x) x'^l = 0.

    `coefficients[l]` is the text of f_l; index 0 is g. Strings are kept verbatim
    so a document round-trips bit-exactly.
    """

    model_config = ConfigDict(extra="ignore")

    name: str = ""
    n: Optional[int] = None
    coefficients: List[str] = Field(default_factory=list)
    parameters: Dict[str, ParamValue] = Field(default_factory=dict)
    theorem3: Optional[QuadrupleDocument] = None

    portrait: Optional[PortraitSection] = None
    cycle: Optional[CycleSection] = None
    hopf: Optional[HopfSection] = None

    @field_validator("coefficients", mode="before")
    @classmethod
    def _coerce_coefficients(cls, v):
        if v is None:
            return []
        return [str(c) if not isinstance(c, str) else c for c in v]
