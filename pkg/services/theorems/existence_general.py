"""
Existence check for x'' + f_1(x) x' + f_2(x) x'^2 + g(x) = 0.

Tail conditions are decided exactly for coefficients in the exp-sum class
(sums of rational * exp(polynomial)); outside it a geometric tail grid is
sampled for the evidence and the verdict stays Indeterminate.
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from config import settings
from dto.theorem_dto import ConditionResult, TheoremReport, Verdict
from services.symbolic.asymptotics import TailAsymptote, TailBehaviour, expression_tail, sum_behaviour
from services.symbolic.expression import compile_expression
from services.symbolic.rational import to_polynomial
from services.symbolic.sign_analysis import zeros_and_poles
from services.symbolic.sturm import isolate_real_roots
from services.system.equation import EquationSpec, is_identically_zero
from services.theorems.common import (
    TheoremInputError,
    aggregate,
    behaviour_text,
    grid_trend,
    hypotheses,
    is_exact_class,
    negate,
    negative_near_zero,
    positive_point,
    ratio,
    tail_grid,
)

logger = logging.getLogger(__name__)

SIDE_NAME = {1: "+inf", -1: "-inf"}


def _numeric_trend(fn, side: int) -> str:
    xs = tail_grid(side)
    try:
        values = [fn(float(x)) for x in xs]
    except Exception as e:  # quadrature or evaluation failure on the tail
        return f"tail grid failed ({e})"
    return f"{grid_trend(values)} on the grid toward {SIDE_NAME[side]}, last value {values[-1]:.6g}"


# ───────────────────────────────────────────────
# C
# ───────────────────────────────────────────────

def check_c(spec: EquationSpec) -> ConditionResult:
    f1 = spec.coefficient(1)
    near = negative_near_zero("C", f1, "f_1")
    if near.verdict != Verdict.HOLDS:
        return near
    x_pos = positive_point(f1)
    if x_pos is None:
        if is_exact_class(f1):
            return ConditionResult.fails("C", near.evidence + "; but f_1 is negative everywhere")
        return ConditionResult.indeterminate(
            "C", near.evidence + f"; no x with f_1(x) > 0 on [-{settings.sign_window:g}, {settings.sign_window:g}]"
        )
    v = compile_expression(f1).scalar(x_pos)
    return ConditionResult.holds("C", near.evidence + f"; f_1({x_pos:.6g}) = {v:.6g} > 0")


# ───────────────────────────────────────────────
# D1, D2, D3
# ───────────────────────────────────────────────

def _polynomial_extrema(spec: EquationSpec) -> Optional[Tuple[float, float]]:
    """(min of F_1 on x >= 0, max of F_1 on x <= 0) for polynomial f_1, -inf/+inf when unbounded."""
    f1 = to_polynomial(spec.coefficient(1))
    if f1 is None:
        return None
    F1 = f1.antiderivative()
    lower = -math.inf if F1.sign_at_infinity(1) < 0 else 0.0
    upper = math.inf if F1.sign_at_infinity(-1) > 0 else 0.0
    critical = [r.midpoint for r in isolate_real_roots(f1)] if f1.degree >= 1 else []
    for c in critical:
        v = float(F1.evaluate_float(c))
        if c >= 0 and not math.isinf(lower):
            lower = min(lower, v)
        if c <= 0 and not math.isinf(upper):
            upper = max(upper, v)
    return lower, upper


def check_d1(spec: EquationSpec) -> ConditionResult:
    extrema = _polynomial_extrema(spec)
    if extrema is not None:
        lower, upper = extrema
        if math.isinf(lower):
            return ConditionResult.fails("D1", "F_1 -> -inf as x -> +inf")
        if math.isinf(upper):
            return ConditionResult.fails("D1", "F_1 -> +inf as x -> -inf")
        c = max(-lower, upper) + 1.0
        return ConditionResult.holds(
            "D1", f"min_(x>=0) F_1 = {lower:.6g}, max_(x<=0) F_1 = {upper:.6g}; c = {c:.6g}"
        )

    f1 = spec.coefficient(1)
    tails = [expression_tail(f1, s) for s in (1, -1)]
    if any(t is None for t in tails):
        return ConditionResult.indeterminate("D1", "; ".join(_numeric_trend(spec.F1, s) for s in (1, -1)))
    right, left = (t.primitive() for t in tails)
    if right.is_divergent and right.sign < 0:
        return ConditionResult.fails("D1", f"F_1 ~ {right.describe()} -> -inf as x -> +inf")
    if left.is_divergent and left.sign > 0:
        return ConditionResult.fails("D1", f"F_1 ~ {left.describe()} -> +inf as x -> -inf")
    xs = np.linspace(0.0, settings.sign_window, 2001)
    lower = float(np.min(spec.F1.evaluate_array(xs)))
    upper = float(np.max(spec.F1.evaluate_array(-xs)))
    c = max(-lower, upper) + 1.0
    return ConditionResult.holds(
        "D1",
        f"F_1 tails {right.describe()} / {left.describe()}; grid min_(x>=0) F_1 = {lower:.6g}, "
        f"max_(x<=0) F_1 = {upper:.6g}; c = {c:.6g}",
    )


def check_d2(spec: EquationSpec) -> ConditionResult:
    parts: List[ConditionResult] = []
    for side in (1, -1):
        label = "D2+" if side > 0 else "D2-"
        name = "G + F_1" if side > 0 else "G - F_1"
        g_tail = expression_tail(spec.g, side)
        f_tail = expression_tail(spec.coefficient(1), side)
        if g_tail is None or f_tail is None:
            fn = (lambda x: spec.G(x) + spec.F1(x)) if side > 0 else (lambda x: spec.G(x) - spec.F1(x))
            parts.append(ConditionResult.indeterminate(label, f"{name}: " + _numeric_trend(fn, side)))
            continue
        F = f_tail.primitive()
        terms = [g_tail.primitive(), F if side > 0 else negate(F)]
        b = sum_behaviour(terms)
        text = f"{name} -> {behaviour_text(b)} as x -> {SIDE_NAME[side]}"
        if b == TailBehaviour.PLUS_INFINITY:
            parts.append(ConditionResult.holds(label, text))
        elif b == TailBehaviour.UNKNOWN:
            parts.append(ConditionResult.indeterminate(label, text))
        else:
            parts.append(ConditionResult.fails(label, text))
    return aggregate("D2", parts, "; ".join(p.evidence for p in parts))


def _tail_integral(spec: EquationSpec, side: int) -> float:
    f2 = compile_expression(spec.coefficient(2)).scalar
    if side > 0:
        return float(quad(f2, 0.0, math.inf, limit=400)[0])
    return -float(quad(f2, -math.inf, 0.0, limit=400)[0])


def check_d3(spec: EquationSpec) -> ConditionResult:
    f2 = spec.coefficient(2)
    conflict = ""
    poly = to_polynomial(f2)
    if poly is not None and not poly.is_zero:
        conflict = "; a polynomial f_2 cannot satisfy D3 together with E1 or E1'"
    if is_identically_zero(f2):
        return ConditionResult.holds("D3", "f_2 = 0, l+ = l- = 0")

    parts: List[ConditionResult] = []
    for side in (1, -1):
        label = "D3+" if side > 0 else "D3-"
        t = expression_tail(f2, side)
        if t is None:
            parts.append(ConditionResult.indeterminate(label, "F_2: " + _numeric_trend(spec.F2, side)))
            continue
        if t.tail_integrable:
            l = _tail_integral(spec, side)
            parts.append(ConditionResult.holds(label, f"f_2 ~ {t.describe()} is integrable, l = {l:.12g}"))
        else:
            F = t.primitive()
            parts.append(ConditionResult.fails(label, f"F_2 ~ {F.describe()} has no finite limit at {SIDE_NAME[side]}"))
    return aggregate("D3", parts, "; ".join(p.evidence for p in parts) + conflict)


# ───────────────────────────────────────────────
# E
# ───────────────────────────────────────────────

def _eventual_sign(spec: EquationSpec, side: int, want: int, label: str) -> Tuple[ConditionResult, Optional[TailAsymptote]]:
    """f_2 has sign `want` on the tail toward side*inf, with a witness Delta'."""
    f2 = spec.coefficient(2)
    word = ">" if want > 0 else "<"
    region = "x <= -Delta'" if side < 0 else "x >= Delta'"
    t = expression_tail(f2, side)
    if t is None:
        xs = tail_grid(side)
        vals = compile_expression(f2).vector(xs)
        return ConditionResult.indeterminate(
            label, f"f_2 outside the exp-sum class; sign on the tail grid {np.sign(vals[-9:]).astype(int).tolist()}"
        ), None
    if t.sign != want:
        return ConditionResult.fails(label, f"f_2 ~ {t.describe()} as x -> {SIDE_NAME[side]}, not {word} 0"), t
    span = math.inf if is_exact_class(f2) else settings.sign_window
    zeros, poles = zeros_and_poles(f2, -span, span)
    beyond = [abs(z) for z in zeros + poles if z * side > 0]
    delta = (max(beyond) + 1.0) if beyond else 1.0
    suffix = "" if math.isinf(span) else " (grid)"
    return ConditionResult.holds(label, f"f_2 {word} 0 for {region}, Delta' = {delta:.6g}{suffix}"), t


def _limsup_branch(spec: EquationSpec, side: int, label: str) -> ConditionResult:
    """
    side = -1: limsup_{-inf} [F_1 + sqrt(-g/f_2)] < +inf
    side = +1: limsup_{+inf} [F_1 - sqrt(-g/f_2)] > -inf
    """
    f_tail = expression_tail(spec.coefficient(1), side)
    g_tail = expression_tail(spec.g, side)
    f2_tail = expression_tail(spec.coefficient(2), side)
    name = "F_1 + sqrt(-g/f_2)" if side < 0 else "F_1 - sqrt(-g/f_2)"
    if f_tail is None or g_tail is None or f2_tail is None:
        return ConditionResult.indeterminate(label, f"{name}: coefficients outside the exp-sum class")
    q = ratio(negate(g_tail), f2_tail)
    if q is None or q.sign < 0:
        return ConditionResult.indeterminate(label, f"{name}: -g/f_2 has no usable tail")
    root = q.sqrt()
    terms = [f_tail.primitive(), root if side < 0 else negate(root)]
    b = sum_behaviour(terms)
    text = f"{name} -> {behaviour_text(b)} as x -> {SIDE_NAME[side]}"
    if b == TailBehaviour.UNKNOWN:
        return ConditionResult.indeterminate(label, text)
    bad = TailBehaviour.PLUS_INFINITY if side < 0 else TailBehaviour.MINUS_INFINITY
    if b == bad:
        return ConditionResult.fails(label, text)
    return ConditionResult.holds(label, text)


def check_e(spec: EquationSpec) -> ConditionResult:
    branches: List[ConditionResult] = []
    for side, want, names in ((-1, 1, ("E1", "E2")), (1, -1, ("E1'", "E2'"))):
        sign_res, _ = _eventual_sign(spec, side, want, names[0])
        if sign_res.verdict == Verdict.HOLDS:
            limsup_res = _limsup_branch(spec, side, names[1])
        else:
            limsup_res = ConditionResult.indeterminate(names[1], f"not evaluated: {names[0]} does not hold")
        branches.extend([sign_res, limsup_res])

    first = aggregate("E1,E2", branches[:2])
    second = aggregate("E1',E2'", branches[2:])
    evidence = "; ".join(f"{b.label}: {b.verdict.value} ({b.evidence})" for b in branches)
    if Verdict.HOLDS in (first.verdict, second.verdict):
        verdict = Verdict.HOLDS
    elif first.verdict == Verdict.FAILS and second.verdict == Verdict.FAILS:
        verdict = Verdict.FAILS
    else:
        verdict = Verdict.INDETERMINATE
    return ConditionResult(label="E", verdict=verdict, evidence=evidence, details=branches)


def check_existence_general(spec: EquationSpec) -> TheoremReport:
    """At least one periodic orbit for n <= 2 when A, B, C, D1-D3 and E hold."""
    if spec.n > 2:
        raise TheoremInputError(f"T2 is stated for x'' + f_1 x' + f_2 x'^2 + g = 0, got n={spec.n}")
    spec = spec.padded(2)
    conditions = hypotheses(spec)
    conditions.extend([check_c(spec), check_d1(spec), check_d2(spec), check_d3(spec), check_e(spec)])

    notes: List[str] = ["a single global constant c is used for D1"]
    poly = to_polynomial(spec.coefficient(2))
    if poly is not None and not poly.is_zero:
        notes.append("f_2 is a polynomial: D3 and the sign conditions E1/E1' cannot hold together")
    report = TheoremReport.from_conditions("T2", conditions, notes)
    logger.info("T2 on %s: %s", spec.name or "spec", report.overall.value)
    return report
