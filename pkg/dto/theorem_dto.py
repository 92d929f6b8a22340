from __future__ import annotations

from enum import Enum
from typing import List

from pydantic import BaseModel, Field


class Verdict(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INDETERMINATE = "Indeterminate"


class Applicability(str, Enum):
    APPLIES = "Applies"
    DOES_NOT_APPLY = "DoesNotApply"
    INDETERMINATE = "Indeterminate"


EXIT_CODES = {
    Applicability.APPLIES: 0,
    Applicability.DOES_NOT_APPLY: 1,
    Applicability.INDETERMINATE: 2,
}


# ───────────────────────────────────────────────
# Per-hypothesis results
# ───────────────────────────────────────────────

class ConditionResult(BaseModel):
    label: str
    verdict: Verdict
    evidence: str = ""
    details: List["ConditionResult"] = Field(default_factory=list)

    @classmethod
    def holds(cls, label: str, evidence: str, **kw) -> "ConditionResult":
        return cls(label=label, verdict=Verdict.HOLDS, evidence=evidence, **kw)

    @classmethod
    def fails(cls, label: str, evidence: str, **kw) -> "ConditionResult":
        return cls(label=label, verdict=Verdict.FAILS, evidence=evidence, **kw)

    @classmethod
    def indeterminate(cls, label: str, evidence: str, **kw) -> "ConditionResult":
        return cls(label=label, verdict=Verdict.INDETERMINATE, evidence=evidence, **kw)


def combine_verdicts(verdicts: List[Verdict]) -> Applicability:
    if any(v == Verdict.FAILS for v in verdicts):
        return Applicability.DOES_NOT_APPLY
    if all(v == Verdict.HOLDS for v in verdicts):
        return Applicability.APPLIES
    return Applicability.INDETERMINATE


class TheoremReport(BaseModel):
    theorem: str
    conditions: List[ConditionResult] = Field(default_factory=list)
    overall: Applicability = Applicability.INDETERMINATE
    notes: List[str] = Field(default_factory=list)

    @classmethod
    def from_conditions(
        cls,
        theorem: str,
        conditions: List[ConditionResult],
        notes: List[str] | None = None,
    ) -> "TheoremReport":
        return cls(
            theorem=theorem,
            conditions=conditions,
            overall=combine_verdicts([c.verdict for c in conditions]),
            notes=list(notes or []),
        )

    def condition(self, label: str) -> ConditionResult:
        for c in self.conditions:
            if c.label == label:
                return c
        raise KeyError(f"{self.theorem} has no condition {label!r}")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.overall]


class ValidationReport(BaseModel):
    """Hypotheses A1 (Lipschitz g), A2 (continuity) and B (x*g(x) > 0 for x != 0)."""

    a1: ConditionResult
    a2: ConditionResult
    b: ConditionResult
    window: float

    @property
    def conditions(self) -> List[ConditionResult]:
        return [self.a1, self.a2, self.b]

    @property
    def valid(self) -> bool:
        return all(c.verdict == Verdict.HOLDS for c in self.conditions)
