from __future__ import annotations

import logging
from typing import List

from dto.theorem_dto import ConditionResult, TheoremReport, Verdict
from services.symbolic.expression import X, differentiate, mul
from services.system.equation import EquationSpec
from services.theorems.common import aggregate, hypotheses, negative_near_zero, nonnegative

logger = logging.getLogger(__name__)

FORM = "x'' + sum_l f_(2l+1)(x) x'^(2l+1) + x = 0 with N >= 1"


def check_l1(spec: EquationSpec) -> ConditionResult:
    return negative_near_zero("L1", spec.coefficient(1), "f_1")


def check_l2(spec: EquationSpec, odd: List[int]) -> ConditionResult:
    parts = [nonnegative(f"f_{l}>=0", spec.coefficient(l), f"f_{l}") for l in odd if l >= 3]
    return aggregate("L2", parts)


def check_l3(spec: EquationSpec, odd: List[int]) -> ConditionResult:
    """f nondecreasing on x > 0 and nonincreasing on x < 0, i.e. x f'(x) >= 0 everywhere."""
    parts = []
    for l in odd:
        slope = mul(X, differentiate(spec.coefficient(l)))
        res = nonnegative(f"f_{l} monotone", slope, f"x*f_{l}'(x)")
        parts.append(res)
    return aggregate("L3", parts)


def check_massera(spec: EquationSpec) -> TheoremReport:
    """Unique globally attracting limit cycle under L1-L3 for the odd-damping form."""
    reason = spec.odd_damping_violation()
    if reason is not None:
        form = ConditionResult.fails("form", f"not of the form {FORM}: {reason}")
        report = TheoremReport.from_conditions("T4", [form])
        logger.info("T4 on %s: structural mismatch (%s)", spec.name or "spec", reason)
        return report

    odd = [l for l in range(1, spec.n + 1, 2) if l == 1 or l in spec.nonzero_indices]
    conditions = hypotheses(spec)
    conditions.append(ConditionResult.holds("form", FORM))
    l3 = check_l3(spec, odd)
    conditions.extend([check_l1(spec), check_l2(spec, odd), l3])

    notes: List[str] = []
    if l3.verdict == Verdict.FAILS:
        failing = [d.label for d in l3.details if d.verdict == Verdict.FAILS]
        notes.append(
            f"L3 is checked as global monotonicity on each half-line ({', '.join(failing)} fail); "
            "a reading restricted to a neighbourhood of the origin may accept this equation"
        )
    report = TheoremReport.from_conditions("T4", conditions, notes)
    logger.info("T4 on %s: %s", spec.name or "spec", report.overall.value)
    return report
