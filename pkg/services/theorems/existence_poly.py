from __future__ import annotations

import logging

from dto.theorem_dto import ConditionResult, TheoremReport
from services.symbolic.polynomial import Polynomial
from services.symbolic.sturm import SignTag, sturm_sign_analysis
from services.system.equation import EquationSpec, PolynomialQuadruple
from services.system.quadruple import polynomial_quadruple
from services.theorems.common import aggregate

logger = logging.getLogger(__name__)


def _p_positive(p: Polynomial) -> ConditionResult:
    s = sturm_sign_analysis(p)
    if s.tag == SignTag.EVERYWHERE_POSITIVE:
        return ConditionResult.holds("p>0", f"p = {p} has no real root and positive leading coefficient")
    return ConditionResult.fails("p>0", f"p = {p}: {s.describe()}")


def _q1_negative_at_zero(q1: Polynomial) -> ConditionResult:
    v = q1(0)
    if v < 0:
        return ConditionResult.holds("q1(0)<0", f"q1(0) = {v}")
    return ConditionResult.fails("q1(0)<0", f"q1(0) = {v} is not negative")


def _xr_positive(r: Polynomial) -> ConditionResult:
    xr = Polynomial.x() * r
    s = sturm_sign_analysis(xr)
    only_origin = len(s.roots) == 1 and s.roots[0].exact and s.roots[0].lo == 0
    if s.tag == SignTag.NONNEG_WITH_ZEROS and only_origin:
        return ConditionResult.holds("xr>0", "x*r(x) vanishes only at 0 and is positive elsewhere")
    return ConditionResult.fails("xr>0", f"x*r(x): {s.describe()}")


def check_h1(q: PolynomialQuadruple) -> ConditionResult:
    return aggregate("H1", [_p_positive(q.p), _q1_negative_at_zero(q.q1), _xr_positive(q.r)])


def check_h2(q: PolynomialQuadruple) -> ConditionResult:
    d, lead = q.q1.degree, q.q1.leading_coefficient
    if q.q1.is_zero:
        return ConditionResult.fails("H2", "q1 is identically zero")
    if d % 2 == 0 and lead > 0:
        return ConditionResult.holds("H2", f"deg q1 = {d} even, leading coefficient {lead} > 0")
    return ConditionResult.fails("H2", f"deg q1 = {d}, leading coefficient {lead}")


def check_h3(q: PolynomialQuadruple) -> ConditionResult:
    if q.q2.is_zero:
        return ConditionResult.indeterminate("H3", "q2 is identically zero, its degree is undefined")
    dp, dq = q.p.degree, q.q2.degree
    text = f"deg p = {dp}, deg q2 + 2 = {dq + 2}"
    return ConditionResult.holds("H3", text) if dp >= dq + 2 else ConditionResult.fails("H3", text)


def check_h4(q: PolynomialQuadruple) -> ConditionResult:
    if q.q2.is_zero:
        return ConditionResult.indeterminate("H4", "q2 is identically zero, its degree is undefined")
    d, lead = q.q2.degree, q.q2.leading_coefficient
    if d % 2 == 0:
        return ConditionResult.holds("H4", f"deg q2 = {d} is even")
    if lead < 0:
        return ConditionResult.holds("H4", f"deg q2 = {d} odd with leading coefficient {lead} < 0")
    return ConditionResult.fails("H4", f"deg q2 = {d} odd with leading coefficient {lead} > 0")


def check_h5(q: PolynomialQuadruple) -> ConditionResult:
    if q.q2.is_zero:
        return ConditionResult.indeterminate("H5", "q2 is identically zero, its degree is undefined")
    dr, bound = q.r.degree, 2 * q.q1.degree + q.q2.degree + 1
    text = f"deg r = {dr}, 2 deg q1 + deg q2 + 1 = {bound}"
    return ConditionResult.holds("H5", text) if dr <= bound else ConditionResult.fails("H5", text)


def check_existence_poly(quad: PolynomialQuadruple) -> TheoremReport:
    """p x'' + p q1 x' + q2 x'^2 + r = 0 has a limit cycle when H1-H5 hold; every check is exact."""
    conditions = [check_h1(quad), check_h2(quad), check_h3(quad), check_h4(quad), check_h5(quad)]
    notes = [f"p = {quad.p}, q1 = {quad.q1}, q2 = {quad.q2}, r = {quad.r}"]
    report = TheoremReport.from_conditions("T3", conditions, notes)
    logger.info("T3: %s", report.overall.value)
    return report


def check_existence_poly_spec(spec: EquationSpec) -> TheoremReport:
    """T3 on a spec whose coefficients reduce to a polynomial quadruple."""
    quad = polynomial_quadruple(spec)
    if quad is None:
        reason = ConditionResult.fails(
            "form", "coefficients do not reduce to f_0 = r/p, f_1 = q1, f_2 = q2/p with polynomial p, q1, q2, r"
        )
        return TheoremReport.from_conditions("T3", [reason])
    return check_existence_poly(quad)
