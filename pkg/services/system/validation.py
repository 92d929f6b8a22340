from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from config import settings
from dto.theorem_dto import ConditionResult, ValidationReport
from services.symbolic.asymptotics import to_exp_sum
from services.symbolic.expression import X, Expression, compile_expression, differentiate, mul
from services.symbolic.rational import to_polynomial
from services.symbolic.sign_analysis import sample_grid, sign_summary
from services.symbolic.sturm import SignTag, isolate_real_roots
from services.system.equation import EquationSpec, SpecError

logger = logging.getLogger(__name__)


def _poles(e: Expression) -> Optional[List[float]]:
    """Real poles of e for the exp-sum class, None outside it."""
    es = to_exp_sum(e)
    if es is None:
        return None
    out: List[float] = []
    for r in es.terms.values():
        if r.den.degree > 0:
            out.extend(root.midpoint for root in isolate_real_roots(r.den))
    return sorted(set(out))


def check_a1(spec: EquationSpec, window: float, points: int) -> ConditionResult:
    g = spec.g
    if to_polynomial(g) is not None:
        return ConditionResult.holds("A1", "g is a polynomial, hence locally Lipschitz")
    dg = compile_expression(differentiate(g)).vector(sample_grid(window, points))
    if not np.all(np.isfinite(dg)):
        return ConditionResult.fails("A1", f"g' is unbounded on [-{window:g}, {window:g}]")
    bound = float(np.max(np.abs(dg)))
    return ConditionResult.holds("A1", f"max |g'| = {bound:.6g} on [-{window:g}, {window:g}] (grid)")


def check_a2(spec: EquationSpec, window: float, points: int) -> ConditionResult:
    xs = sample_grid(window, points)
    for l, f in enumerate(spec.coefficients):
        poles = _poles(f)
        if poles is None:
            values = compile_expression(f).vector(xs)
            bad = xs[~np.isfinite(values)]
            if bad.size:
                return ConditionResult.fails("A2", f"f_{l} is not finite at x={bad[0]:.6g}")
            continue
        if poles:
            where = ", ".join(f"{p:.6g}" for p in poles)
            return ConditionResult.fails("A2", f"f_{l} has real poles at {where}")
    return ConditionResult.holds("A2", "all coefficients are continuous on the real line")


def check_b(spec: EquationSpec, window: float, points: int) -> ConditionResult:
    xg = mul(X, spec.g)
    summary = sign_summary(xg, window=window, points=points)
    if summary.exact:
        if summary.poles:
            return ConditionResult.fails("B", f"x*g(x) has poles: {summary.describe()}")
        only_origin = len(summary.roots) == 1 and summary.roots[0].exact and summary.roots[0].lo == 0
        if summary.tag == SignTag.NONNEG_WITH_ZEROS and only_origin:
            return ConditionResult.holds("B", "x*g(x) > 0 for x != 0 (exact)")
        return ConditionResult.fails("B", f"x*g(x) is {summary.describe()}")

    xs = sample_grid(window, points)
    xs = xs[xs != 0.0]
    values = compile_expression(xg).vector(xs)
    if not np.all(np.isfinite(values)):
        return ConditionResult.indeterminate("B", "x*g(x) is not finite on the grid")
    bad = np.nonzero(values <= 0)[0]
    if bad.size:
        x0 = float(xs[bad[0]])
        return ConditionResult.fails("B", f"x*g(x) = {values[bad[0]]:.6g} <= 0 at x={x0:.6g}")
    g0 = compile_expression(spec.g).scalar(0.0)
    if g0 != 0.0:
        return ConditionResult.fails("B", f"g(0) = {g0:.6g} != 0")
    return ConditionResult.holds("B", f"x*g(x) > 0 on the grid over [-{window:g}, {window:g}] minus 0")


def validate(
    spec: EquationSpec,
    *,
    window: Optional[float] = None,
    points: Optional[int] = None,
) -> ValidationReport:
    """Hypotheses A1, A2 and B."""
    if not spec.coefficients:
        raise SpecError("empty coefficient list")
    window = float(window if window is not None else settings.sign_window)
    points = int(points if points is not None else settings.grid_points)
    report = ValidationReport(
        a1=check_a1(spec, window, points),
        a2=check_a2(spec, window, points),
        b=check_b(spec, window, points),
        window=window,
    )
    logger.debug("validate %s -> %s", spec.name or "spec", [c.verdict.value for c in report.conditions])
    return report
