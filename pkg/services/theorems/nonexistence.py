from __future__ import annotations

import logging
from typing import List

from dto.theorem_dto import ConditionResult, TheoremReport, Verdict
from services.symbolic.sign_analysis import sign_summary
from services.symbolic.sturm import SignTag
from services.system.equation import EquationSpec, is_identically_zero
from services.theorems.common import hypotheses, one_signed

logger = logging.getLogger(__name__)


def _common_sign(spec: EquationSpec, odd: List[int]) -> ConditionResult:
    """All non-vanishing odd coefficients are >= 0, or all are <= 0."""
    signs = {}
    for l in odd:
        summary = sign_summary(spec.coefficient(l))
        if summary.is_nonnegative:
            signs[l] = 1
        elif summary.is_nonpositive:
            signs[l] = -1
        elif summary.tag == SignTag.INDETERMINATE:
            return ConditionResult.indeterminate("sign", f"sign of f_{l} undecided")
        else:
            return ConditionResult.fails("sign", f"f_{l} changes sign")
    if not signs:
        return ConditionResult.holds("sign", "no odd coefficient to compare")
    if len(set(signs.values())) == 1:
        word = "nonnegative" if next(iter(signs.values())) > 0 else "nonpositive"
        return ConditionResult.holds("sign", f"f_{sorted(signs)} all {word}")
    pos = [l for l, s in signs.items() if s > 0]
    neg = [l for l, s in signs.items() if s < 0]
    return ConditionResult.fails("sign", f"f_{pos} >= 0 but f_{neg} <= 0")


def check_nonexistence(spec: EquationSpec) -> TheoremReport:
    """
    No periodic orbits when every odd-power coefficient f_1, f_3, ... keeps one
    sign, they share it, and at least one of them does not vanish.
    """
    conditions = hypotheses(spec)
    odd_all = list(range(1, spec.n + 1, 2))
    odd = [l for l in odd_all if not is_identically_zero(spec.coefficient(l))]

    if odd:
        conditions.append(ConditionResult.holds("N", f"odd coefficient(s) f_{odd} not identically zero"))
    else:
        conditions.append(
            ConditionResult.fails("N", "every odd-power coefficient vanishes; the unperturbed system is a center")
        )
    for l in odd_all:
        conditions.append(one_signed(f"f_{l}", spec.coefficient(l), f"f_{l}"))
    conditions.append(_common_sign(spec, odd))

    notes: List[str] = []
    if any(c.verdict == Verdict.INDETERMINATE for c in conditions):
        notes.append("grid-based sign checks only certify sign changes, not constancy beyond the window")
    report = TheoremReport.from_conditions("T1", conditions, notes)
    logger.info("T1 on %s: %s", spec.name or "spec", report.overall.value)
    return report
