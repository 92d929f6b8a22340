"""Condition helpers shared by the theorem checkers."""
from __future__ import annotations

import dataclasses
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from config import settings
from dto.theorem_dto import ConditionResult, Verdict
from services.symbolic.asymptotics import TailAsymptote, TailBehaviour, to_exp_sum
from services.symbolic.expression import EvaluationError, Expression, compile_expression
from services.symbolic.sign_analysis import sign_summary, zeros_and_poles
from services.symbolic.sturm import SignTag
from services.system.equation import EquationSpec
from services.system.validation import validate

logger = logging.getLogger(__name__)


class TheoremInputError(ValueError):
    """The equation is outside the class a checker is defined for."""


def hypotheses(spec: EquationSpec) -> List[ConditionResult]:
    """A1, A2 and B as assumed by every theorem."""
    return validate(spec).conditions


def aggregate(label: str, parts: Sequence[ConditionResult], evidence: str = "") -> ConditionResult:
    """One condition made of several: Fails if any part fails, Holds if all hold."""
    verdicts = [p.verdict for p in parts]
    if any(v == Verdict.FAILS for v in verdicts):
        verdict = Verdict.FAILS
    elif all(v == Verdict.HOLDS for v in verdicts):
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.INDETERMINATE
    text = evidence or "; ".join(f"{p.label}: {p.verdict.value}" for p in parts)
    return ConditionResult(label=label, verdict=verdict, evidence=text, details=list(parts))


def is_exact_class(e: Expression) -> bool:
    es = to_exp_sum(e)
    return es is not None and (es.is_zero or es.single_term is not None)


# ───────────────────────────────────────────────
# Sign conditions
# ───────────────────────────────────────────────

def negative_near_zero(label: str, e: Expression, name: str, *, window: Optional[float] = None) -> ConditionResult:
    """e(x) < 0 for |x| < delta, with delta = distance from 0 to the nearest zero or pole."""
    window = float(window if window is not None else settings.sign_window)
    try:
        v0 = compile_expression(e).scalar(0.0)
    except EvaluationError:
        return ConditionResult.fails(label, f"{name} is not defined at 0")
    if not v0 < 0:
        return ConditionResult.fails(label, f"{name}(0) = {v0:.6g} is not negative")
    exact = is_exact_class(e)
    span = math.inf if exact else window
    zeros, poles = zeros_and_poles(e, -span, span)
    nearest = min((abs(z) for z in zeros + poles), default=math.inf)
    if math.isinf(nearest):
        if exact:
            return ConditionResult.holds(label, f"{name}(0) = {v0:.6g} < 0 and {name} has no real zero; delta = inf")
        return ConditionResult.holds(
            label, f"{name}(0) = {v0:.6g} < 0 with no zero on [-{window:g}, {window:g}]; delta = {window:g} (grid)"
        )
    suffix = "" if exact else " (grid)"
    return ConditionResult.holds(label, f"{name}(0) = {v0:.6g} < 0, delta = {nearest:.12g}{suffix}")


def nonnegative(label: str, e: Expression, name: str) -> ConditionResult:
    summary = sign_summary(e)
    text = f"{name}: {summary.describe()}"
    if summary.tag == SignTag.INDETERMINATE:
        return ConditionResult.indeterminate(label, text)
    if summary.is_nonnegative:
        return ConditionResult.holds(label, text)
    return ConditionResult.fails(label, text)


def one_signed(label: str, e: Expression, name: str) -> ConditionResult:
    summary = sign_summary(e)
    text = f"{name}: {summary.describe()}"
    if summary.tag == SignTag.INDETERMINATE:
        return ConditionResult.indeterminate(label, text)
    if summary.is_one_signed:
        return ConditionResult.holds(label, text)
    return ConditionResult.fails(label, text)


def positive_point(e: Expression, *, window: Optional[float] = None) -> Optional[float]:
    """Some x with e(x) > 0 (between or beyond exact roots, else on the grid), or None."""
    window = float(window if window is not None else settings.sign_window)
    summary = sign_summary(e, window=window)
    if summary.positive_at is not None:
        return summary.positive_at
    if summary.tag in (SignTag.EVERYWHERE_NEGATIVE, SignTag.NONPOS_WITH_ZEROS, SignTag.IDENTICALLY_ZERO):
        return None
    f = compile_expression(e)
    cuts = sorted(r.midpoint for r in summary.roots + summary.poles)
    if cuts:
        candidates = [cuts[0] - 1.0] + [0.5 * (a + b) for a, b in zip(cuts, cuts[1:])] + [cuts[-1] + 1.0]
    else:
        candidates = [0.0, 1.0, -1.0]
    for x in candidates:
        try:
            if f.scalar(x) > 0:
                return float(x)
        except EvaluationError:
            continue
    xs = np.linspace(-window, window, settings.grid_points)
    vals = f.vector(xs)
    hits = np.nonzero(np.isfinite(vals) & (vals > 0))[0]
    return float(xs[hits[0]]) if hits.size else None


# ───────────────────────────────────────────────
# Tails
# ───────────────────────────────────────────────

def negate(t: TailAsymptote) -> TailAsymptote:
    return dataclasses.replace(t, sign=-t.sign)


def ratio(num: TailAsymptote, den: TailAsymptote) -> Optional[TailAsymptote]:
    """Asymptote of num/den, or None outside the plain power-times-exp form."""
    if num.bounded or den.bounded or den.sign == 0 or num.log or den.log:
        return None
    if num.sign == 0:
        return num
    return TailAsymptote(
        side=num.side,
        sign=num.sign * den.sign,
        coefficient=num.coefficient / den.coefficient,
        power=num.power - den.power,
        exponent=num.exponent - den.exponent,
    )


def behaviour_text(b: TailBehaviour) -> str:
    return {
        TailBehaviour.PLUS_INFINITY: "+inf",
        TailBehaviour.MINUS_INFINITY: "-inf",
        TailBehaviour.BOUNDED: "bounded",
        TailBehaviour.UNKNOWN: "undecided (leading terms cancel)",
    }[b]


def tail_grid(side: int, *, window: Optional[float] = None) -> np.ndarray:
    """Geometric grid toward side*infinity ending at the sign window."""
    window = float(window if window is not None else settings.sign_window)
    decades = settings.tail_decades
    return side * np.geomspace(window / 10 ** decades, window, 4 * decades + 1)


def grid_trend(values: Sequence[float]) -> str:
    """Trend of the last two decades of a tail-grid sample."""
    tail = np.asarray(values[-9:], dtype=float)
    if not np.all(np.isfinite(tail)):
        return "non-finite"
    d = np.diff(tail)
    if np.all(d > 0):
        return "increasing"
    if np.all(d < 0):
        return "decreasing"
    return "not monotone"
