"""
Exact tail behaviour for the class of finite sums  sum_i R_i(x) * exp(P_i(x))
with R_i rational and P_i polynomial.

This is the class the existence checks can decide exactly: dominant terms,
eventual signs, tail integrability, and the growth of primitives and square roots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

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
)
from services.symbolic.polynomial import Polynomial
from services.symbolic.rational import RationalFunction


class ExpSum:
    """Canonical sum of rational * exp(polynomial) terms, keyed by exponent."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Polynomial, RationalFunction]):
        self.terms: Dict[Polynomial, RationalFunction] = {
            p: r for p, r in terms.items() if not r.is_zero
        }

    @classmethod
    def rational(cls, r: RationalFunction) -> "ExpSum":
        return cls({Polynomial(): r})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_rational(self) -> bool:
        return all(p.is_zero for p in self.terms)

    @property
    def single_term(self) -> Optional[Tuple[RationalFunction, Polynomial]]:
        if len(self.terms) != 1:
            return None
        ((p, r),) = self.terms.items()
        return r, p

    def __add__(self, other: "ExpSum") -> "ExpSum":
        out = dict(self.terms)
        for p, r in other.terms.items():
            out[p] = out[p] + r if p in out else r
        return ExpSum(out)

    def __neg__(self) -> "ExpSum":
        return ExpSum({p: -r for p, r in self.terms.items()})

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    def __mul__(self, other: "ExpSum") -> "ExpSum":
        out: Dict[Polynomial, RationalFunction] = {}
        for p1, r1 in self.terms.items():
            for p2, r2 in other.terms.items():
                p, r = p1 + p2, r1 * r2
                out[p] = out[p] + r if p in out else r
        return ExpSum(out)

    def reciprocal(self) -> Optional["ExpSum"]:
        term = self.single_term
        if term is None:
            return None
        r, p = term
        return ExpSum({-p: RationalFunction.constant(1) / r})

    def __pow__(self, n: int) -> Optional["ExpSum"]:
        base: Optional[ExpSum] = self
        if n < 0:
            base = self.reciprocal()
            if base is None:
                return None
            n = -n
        out = ExpSum.rational(RationalFunction.constant(1))
        for _ in range(n):
            out = out * base
        return out

    def derivative(self) -> "ExpSum":
        out: Dict[Polynomial, RationalFunction] = {}
        for p, r in self.terms.items():
            out[p] = r.derivative() + r * RationalFunction(p.derivative())
        return ExpSum(out)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for p, r in self.terms.items():
            parts.append(f"[{r}]" if p.is_zero else f"[{r}]*exp({p})")
        return " + ".join(parts)


def to_exp_sum(e: Expression) -> Optional[ExpSum]:
    """Exact exp-sum form of e; None when e leaves the class (e.g. exp of a rational non-polynomial)."""
    if isinstance(e, Const):
        v = e.value if isinstance(e.value, Fraction) else Fraction(e.value)
        return ExpSum.rational(RationalFunction.constant(v))
    if isinstance(e, Var):
        return ExpSum.rational(RationalFunction(Polynomial.x()))
    if isinstance(e, Neg):
        inner = to_exp_sum(e.operand)
        return None if inner is None else -inner
    if isinstance(e, Pow):
        base = to_exp_sum(e.base)
        return None if base is None else base ** e.exponent
    if isinstance(e, Exp):
        arg = to_exp_sum(e.argument)
        if arg is None or not arg.is_rational:
            return None
        if arg.is_zero:
            return ExpSum.rational(RationalFunction.constant(1))
        (r,) = arg.terms.values()
        if not r.is_polynomial:
            return None
        return ExpSum({r.num: RationalFunction.constant(1)})
    if isinstance(e, (Add, Sub, Mul, Div)):
        left, right = to_exp_sum(e.left), to_exp_sum(e.right)
        if left is None or right is None:
            return None
        if isinstance(e, Add):
            return left + right
        if isinstance(e, Sub):
            return left - right
        if isinstance(e, Mul):
            return left * right
        inv = right.reciprocal()
        return None if inv is None else left * inv
    raise TypeError(f"unknown expression node {type(e).__name__}")


# ───────────────────────────────────────────────
# Tail asymptotes
# ───────────────────────────────────────────────

def _limit_direction(p: Polynomial, side: int) -> int:
    """+1 if p -> +inf, -1 if p -> -inf, 0 if p is constant, as x -> side*inf."""
    if p.degree < 1:
        return 0
    return p.sign_at_infinity(side)


@dataclass(frozen=True)
class TailAsymptote:
    """
    f(x) ~ sign * coefficient * |x|^power * exp(exponent(x)) [* log|x| when log]
    as x -> side * infinity. `bounded` marks a primitive whose tail converges
    (the limit is finite but not tracked).
    """

    side: int
    sign: int
    coefficient: float = 0.0
    power: Fraction = Fraction(0)
    exponent: Polynomial = Polynomial()
    log: bool = False
    bounded: bool = False

    @property
    def is_zero(self) -> bool:
        return self.sign == 0 and not self.bounded

    @property
    def exp_direction(self) -> int:
        return _limit_direction(self.exponent, self.side)

    @property
    def is_divergent(self) -> bool:
        if self.bounded or self.sign == 0:
            return False
        d = self.exp_direction
        if d != 0:
            return d > 0
        return self.power > 0 or (self.power == 0 and self.log)

    @property
    def tends_to_zero(self) -> bool:
        if self.sign == 0 and not self.bounded:
            return True
        if self.bounded:
            return False
        d = self.exp_direction
        if d != 0:
            return d < 0
        return self.power < 0

    @property
    def tail_integrable(self) -> bool:
        """Does the integral of f from 0 towards side*inf converge at the tail?"""
        if self.sign == 0 and not self.bounded:
            return True
        d = self.exp_direction
        if d != 0:
            return d < 0
        return self.power < -1

    def sqrt(self) -> "TailAsymptote":
        if self.sign < 0:
            raise ValueError("square root of an eventually negative function")
        if self.sign == 0:
            return self
        return TailAsymptote(
            side=self.side,
            sign=1,
            coefficient=math.sqrt(self.coefficient),
            power=self.power / 2,
            exponent=self.exponent.scale(Fraction(1, 2)),
            log=self.log,
        )

    def primitive(self) -> "TailAsymptote":
        """Tail of x -> integral_0^x f."""
        if self.sign == 0:
            return self
        if self.tail_integrable:
            return TailAsymptote(side=self.side, sign=0, bounded=True)
        # the primitive picks up the orientation of the integration path
        sign = self.sign if self.side > 0 else -self.sign
        d = self.exp_direction
        if d == 0:
            if self.power == -1:
                return TailAsymptote(side=self.side, sign=sign, coefficient=self.coefficient, log=True)
            k = self.power + 1
            return TailAsymptote(side=self.side, sign=sign, coefficient=self.coefficient / float(k), power=k)
        m = self.exponent.degree
        rate = abs(m * float(self.exponent.leading_coefficient))
        return TailAsymptote(
            side=self.side,
            sign=sign,
            coefficient=self.coefficient / rate,
            power=self.power - (m - 1),
            exponent=self.exponent,
        )

    def describe(self) -> str:
        if self.bounded:
            return "bounded"
        if self.sign == 0:
            return "0"
        sgn = "+" if self.sign > 0 else "-"
        body = f"{sgn}{self.coefficient:.6g}*|x|^{self.power}"
        if self.log:
            body += "*log|x|"
        if not self.exponent.is_zero:
            body += f"*exp({self.exponent})"
        return body


def dominance(a: TailAsymptote, b: TailAsymptote) -> int:
    """+1 if |a| >> |b| at the shared side, -1 if |b| >> |a|, 0 when of the same order."""
    if a.sign == 0 and not a.bounded:
        return 0 if (b.sign == 0 and not b.bounded) else -1
    if b.sign == 0 and not b.bounded:
        return 1
    if a.bounded or b.bounded:
        if a.bounded and b.bounded:
            return 0
        other = b if a.bounded else a
        if other.is_divergent:
            return -1 if a.bounded else 1
        return 0
    d = _limit_direction(a.exponent - b.exponent, a.side)
    if d != 0:
        return d
    if a.power != b.power:
        return 1 if a.power > b.power else -1
    if a.log != b.log:
        return 1 if a.log else -1
    return 0


class TailBehaviour(str, Enum):
    PLUS_INFINITY = "+inf"
    MINUS_INFINITY = "-inf"
    BOUNDED = "bounded"
    UNKNOWN = "unknown"


def sum_behaviour(terms: Sequence[TailAsymptote]) -> TailBehaviour:
    """Limit behaviour of a sum of terms with known asymptotes (same side)."""
    divergent = [t for t in terms if t.is_divergent]
    if not divergent:
        return TailBehaviour.BOUNDED
    top: List[TailAsymptote] = [divergent[0]]
    for t in divergent[1:]:
        d = dominance(t, top[0])
        if d > 0:
            top = [t]
        elif d == 0:
            top.append(t)
    total = sum(t.sign * t.coefficient for t in top)
    scale = max(t.coefficient for t in top)
    if abs(total) <= 1e-12 * scale:
        return TailBehaviour.UNKNOWN
    return TailBehaviour.PLUS_INFINITY if total > 0 else TailBehaviour.MINUS_INFINITY


def _term_asymptote(r: RationalFunction, p: Polynomial, side: int) -> TailAsymptote:
    k = r.leading_power
    lead = float(r.leading_coefficient)
    signed = lead * (1 if (side > 0 or k % 2 == 0) else -1)
    try:
        scale = math.exp(float(p.coefficient(0)))
    except OverflowError:
        scale = math.inf
    return TailAsymptote(
        side=side,
        sign=1 if signed > 0 else -1,
        coefficient=abs(signed) * scale,
        power=Fraction(k),
        exponent=p.without_constant(),
    )


def tail_asymptote(es: ExpSum, side: int) -> TailAsymptote:
    """Dominant term of an exp-sum as x -> side*inf."""
    if side not in (1, -1):
        raise ValueError(f"side must be +1 or -1, got {side}")
    if es.is_zero:
        return TailAsymptote(side=side, sign=0)
    candidates = [_term_asymptote(r, p, side) for p, r in es.terms.items()]
    top = [candidates[0]]
    for t in candidates[1:]:
        d = dominance(t, top[0])
        if d > 0:
            top = [t]
        elif d == 0:
            top.append(t)
    if len(top) == 1:
        return top[0]
    # same growth: exponents differ only by a constant, so the scalar weights add
    total = sum(t.sign * t.coefficient for t in top)
    lead = top[0]
    return TailAsymptote(
        side=side,
        sign=(total > 0) - (total < 0),
        coefficient=abs(total),
        power=lead.power,
        exponent=lead.exponent,
    )


def expression_tail(e: Expression, side: int) -> Optional[TailAsymptote]:
    es = to_exp_sum(e)
    return None if es is None else tail_asymptote(es, side)
