from __future__ import annotations

from fractions import Fraction
from typing import List, Optional

from services.symbolic.expression import (
    Add,
    Const,
    Div,
    Exp,
    Expression,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    div,
)
from services.symbolic.polynomial import Polynomial, poly_gcd
from services.symbolic.sturm import RootInterval, isolate_real_roots


class RationalFunction:
    """num/den in lowest terms with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Optional[Polynomial] = None):
        den = den if den is not None else Polynomial.constant(1)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        g = poly_gcd(num, den)
        if g.degree > 0:
            num, den = num // g, den // g
        lead = den.leading_coefficient
        self.num = num.scale(1 / lead)
        self.den = den.scale(1 / lead)

    @classmethod
    def constant(cls, c) -> "RationalFunction":
        return cls(Polynomial.constant(c))

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    @property
    def is_constant(self) -> bool:
        return self.is_polynomial and self.num.degree <= 0

    @property
    def leading_power(self) -> int:
        """k in num/den ~ lead * x^k at infinity."""
        return self.num.degree - self.den.degree

    @property
    def leading_coefficient(self) -> Fraction:
        return self.num.leading_coefficient / self.den.leading_coefficient

    def sign_at_infinity(self, side: int) -> int:
        if self.is_zero:
            return 0
        return self.num.sign_at_infinity(side) * self.den.sign_at_infinity(side)

    def sign_polynomial(self) -> Polynomial:
        """Same sign as num/den wherever the denominator does not vanish."""
        return self.num * self.den

    def poles(self) -> List[RootInterval]:
        if self.den.degree < 1:
            return []
        return isolate_real_roots(self.den)

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalFunction) and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __pow__(self, n: int) -> "RationalFunction":
        if n >= 0:
            return RationalFunction(self.num ** n, self.den ** n)
        if self.is_zero:
            raise ZeroDivisionError("negative power of the zero rational function")
        return RationalFunction(self.den ** (-n), self.num ** (-n))

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def evaluate_float(self, x):
        return self.num.evaluate_float(x) / self.den.evaluate_float(x)

    def to_expression(self) -> Expression:
        if self.is_polynomial:
            return self.num.to_expression()
        return div(self.num.to_expression(), self.den.to_expression())

    def __str__(self) -> str:
        if self.is_polynomial:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r})"


def _const_fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def to_rational_function(e: Expression) -> Optional[RationalFunction]:
    """Exact rational form of e, or None when e contains an exponential of a non-constant."""
    if isinstance(e, Const):
        return RationalFunction.constant(_const_fraction(e.value))
    if isinstance(e, Var):
        return RationalFunction(Polynomial.x())
    if isinstance(e, Neg):
        inner = to_rational_function(e.operand)
        return None if inner is None else -inner
    if isinstance(e, Pow):
        base = to_rational_function(e.base)
        if base is None or (e.exponent < 0 and base.is_zero):
            return None
        return base ** e.exponent
    if isinstance(e, (Add, Sub, Mul, Div)):
        left = to_rational_function(e.left)
        right = to_rational_function(e.right)
        if left is None or right is None:
            return None
        if isinstance(e, Add):
            return left + right
        if isinstance(e, Sub):
            return left - right
        if isinstance(e, Mul):
            return left * right
        if right.is_zero:
            return None
        return left / right
    if isinstance(e, Exp):
        return None
    raise TypeError(f"unknown expression node {type(e).__name__}")


def to_polynomial(e: Expression) -> Optional[Polynomial]:
    r = to_rational_function(e)
    if r is None or not r.is_polynomial:
        return None
    return r.num.scale(1 / r.den.leading_coefficient)
