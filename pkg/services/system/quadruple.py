from __future__ import annotations

import logging
from typing import Optional

from services.symbolic.polynomial import Polynomial, poly_lcm
from services.symbolic.rational import to_polynomial, to_rational_function
from services.system.equation import EquationSpec, PolynomialQuadruple

logger = logging.getLogger(__name__)


def polynomial_quadruple(spec: EquationSpec) -> Optional[PolynomialQuadruple]:
    """
    (p, q1, q2, r) with f_0 = r/p, f_1 = q1, f_2 = q2/p, or None when the spec is
    not of that shape. p is the lcm of the denominators of f_0 and f_2, scaled
    to a positive leading coefficient; any common positive factor of p, q2, r
    leaves the polynomial conditions unchanged.
    """
    if spec.quadruple is not None:
        return spec.quadruple
    if spec.n > 2:
        return None
    view = spec.padded(2)
    f0 = to_rational_function(view.coefficient(0))
    q1 = to_polynomial(view.coefficient(1))
    f2 = to_rational_function(view.coefficient(2))
    if f0 is None or q1 is None or f2 is None:
        logger.debug("%s has no polynomial quadruple form", spec.name or "spec")
        return None

    p = poly_lcm(f0.den, f2.den)
    if p.is_zero:
        p = Polynomial.constant(1)
    r = f0.num * (p // f0.den)
    q2 = f2.num * (p // f2.den)
    return PolynomialQuadruple(p=p, q1=q1, q2=q2, r=r)
