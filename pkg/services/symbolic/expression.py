from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import singledispatch
from typing import Callable, Dict, Union

import numpy as np

Number = Union[Fraction, float]


class EvaluationError(ValueError):
    """Raised when an expression cannot be evaluated at a point (division by zero)."""


class Expression:
    """
    Immutable expression tree in one real variable `x`.

    Nodes: Const, Var, Add, Sub, Mul, Div, Pow (integer exponent), Neg, Exp.
    Arithmetic operators build simplified trees (constant folding, 0/1 identities).
    """

    precedence = 5

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        if not isinstance(other, int):
            raise TypeError("only integer exponents are supported")
        return power(self, other)

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return to_text(self)

    def evaluate(self, x: float) -> float:
        try:
            return float(self._eval(float(x)))
        except ZeroDivisionError:
            raise EvaluationError(f"division by zero evaluating {to_text(self)} at x={x!r}") from None

    def _eval(self, x: float) -> float:
        raise NotImplementedError

    def _source(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: Number

    @property
    def precedence(self) -> int:  # type: ignore[override]
        v = self.value
        if isinstance(v, Fraction) and v.denominator != 1:
            return 2
        if v < 0:
            return 3
        return 5

    def _eval(self, x: float) -> float:
        return float(self.value)

    def _source(self) -> str:
        return f"({float(self.value)!r})"


@dataclass(frozen=True, eq=True)
class Var(Expression):
    def _eval(self, x: float) -> float:
        return x

    def _source(self) -> str:
        return "x"


@dataclass(frozen=True, eq=True)
class Add(Expression):
    left: Expression
    right: Expression
    precedence = 1

    def _eval(self, x: float) -> float:
        return self.left._eval(x) + self.right._eval(x)

    def _source(self) -> str:
        return f"({self.left._source()} + {self.right._source()})"


@dataclass(frozen=True, eq=True)
class Sub(Expression):
    left: Expression
    right: Expression
    precedence = 1

    def _eval(self, x: float) -> float:
        return self.left._eval(x) - self.right._eval(x)

    def _source(self) -> str:
        return f"({self.left._source()} - {self.right._source()})"


@dataclass(frozen=True, eq=True)
class Mul(Expression):
    left: Expression
    right: Expression
    precedence = 2

    def _eval(self, x: float) -> float:
        return self.left._eval(x) * self.right._eval(x)

    def _source(self) -> str:
        return f"({self.left._source()} * {self.right._source()})"


@dataclass(frozen=True, eq=True)
class Div(Expression):
    left: Expression
    right: Expression
    precedence = 2

    def _eval(self, x: float) -> float:
        return self.left._eval(x) / self.right._eval(x)

    def _source(self) -> str:
        return f"({self.left._source()} / {self.right._source()})"


@dataclass(frozen=True, eq=True)
class Pow(Expression):
    base: Expression
    exponent: int
    precedence = 4

    def _eval(self, x: float) -> float:
        b = self.base._eval(x)
        if self.exponent < 0 and b == 0.0:
            raise ZeroDivisionError
        try:
            return b ** self.exponent
        except OverflowError:
            return math.inf if (b > 0 or self.exponent % 2 == 0) else -math.inf

    def _source(self) -> str:
        return f"({self.base._source()} ** {self.exponent})"


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    operand: Expression
    precedence = 3

    def _eval(self, x: float) -> float:
        return -self.operand._eval(x)

    def _source(self) -> str:
        return f"(-{self.operand._source()})"


@dataclass(frozen=True, eq=True)
class Exp(Expression):
    argument: Expression

    def _eval(self, x: float) -> float:
        return _safe_exp(self.argument._eval(x))

    def _source(self) -> str:
        return f"exp({self.argument._source()})"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
X = Var()


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _coerce(value) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    if isinstance(value, float):
        return Const(value)
    raise TypeError(f"cannot build an expression from {type(value).__name__}")


def constant(value) -> Const:
    return _coerce(value)  # type: ignore[return-value]


def _is_const(e: Expression, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


# ───────────────────────────────────────────────
# Simplifying constructors
# ───────────────────────────────────────────────

def add(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if isinstance(b, Neg):
        return Sub(a, b.operand)
    return Add(a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    if a == b:
        return ZERO
    return Sub(a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a, -1):
        return neg(b)
    if _is_const(b, -1):
        return neg(a)
    return Mul(a, b)


def div(a: Expression, b: Expression) -> Expression:
    if _is_const(b, 1):
        return a
    if _is_const(a, 0) and not _is_const(b, 0):
        return ZERO
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        if isinstance(a.value, Fraction) and isinstance(b.value, Fraction):
            return Const(a.value / b.value)
        return Const(float(a.value) / float(b.value))
    return Div(a, b)


def power(a: Expression, n: int) -> Expression:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const) and not (a.value == 0 and n < 0):
        v = a.value
        return Const(v ** n if isinstance(v, Fraction) else float(v) ** n)
    return Pow(a, int(n))


def neg(a: Expression) -> Expression:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def exp(a: Expression) -> Expression:
    if _is_const(a, 0):
        return ONE
    return Exp(a)


# ───────────────────────────────────────────────
# Printing (parse(to_text(e)) is evaluation-equivalent to e)
# ───────────────────────────────────────────────

def _const_text(v: Number) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if not math.isfinite(v):
        raise ValueError(f"non-finite constant {v!r} has no text form")
    return repr(float(v))


def _wrap(e: Expression, min_precedence: int) -> str:
    text = to_text(e)
    return f"({text})" if e.precedence < min_precedence else text


def to_text(e: Expression) -> str:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Add):
        return f"{_wrap(e.left, 1)} + {_wrap(e.right, 2)}"
    if isinstance(e, Sub):
        return f"{_wrap(e.left, 1)} - {_wrap(e.right, 2)}"
    if isinstance(e, Mul):
        return f"{_wrap(e.left, 2)} * {_wrap(e.right, 3)}"
    if isinstance(e, Div):
        return f"{_wrap(e.left, 2)} / {_wrap(e.right, 3)}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, 5)}^{e.exponent}" if e.exponent >= 0 else f"{_wrap(e.base, 5)}^({e.exponent})"
    if isinstance(e, Neg):
        return f"-{_wrap(e.operand, 3)}"
    if isinstance(e, Exp):
        return f"exp({to_text(e.argument)})"
    raise TypeError(f"unknown expression node {type(e).__name__}")


# ───────────────────────────────────────────────
# Differentiation
# ───────────────────────────────────────────────

@singledispatch
def differentiate(expr: Expression) -> Expression:
    raise NotImplementedError(f"Cannot differentiate a {type(expr).__name__}")


@differentiate.register(Const)
def _(expr: Const) -> Expression:
    return ZERO


@differentiate.register(Var)
def _(expr: Var) -> Expression:
    return ONE


@differentiate.register(Add)
def _(expr: Add) -> Expression:
    return add(differentiate(expr.left), differentiate(expr.right))


@differentiate.register(Sub)
def _(expr: Sub) -> Expression:
    return sub(differentiate(expr.left), differentiate(expr.right))


@differentiate.register(Mul)
def _(expr: Mul) -> Expression:
    """Product rule."""
    u, v = expr.left, expr.right
    return add(mul(differentiate(u), v), mul(u, differentiate(v)))


@differentiate.register(Div)
def _(expr: Div) -> Expression:
    """Quotient rule."""
    u, v = expr.left, expr.right
    du, dv = differentiate(u), differentiate(v)
    if _is_const(dv, 0):
        return div(du, v)
    return div(sub(mul(du, v), mul(u, dv)), power(v, 2))


@differentiate.register(Pow)
def _(expr: Pow) -> Expression:
    n = expr.exponent
    return mul(mul(Const(Fraction(n)), power(expr.base, n - 1)), differentiate(expr.base))


@differentiate.register(Neg)
def _(expr: Neg) -> Expression:
    return neg(differentiate(expr.operand))


@differentiate.register(Exp)
def _(expr: Exp) -> Expression:
    return mul(expr, differentiate(expr.argument))


# ───────────────────────────────────────────────
# Compilation to Python callables
# ───────────────────────────────────────────────

@dataclass(frozen=True)
class CompiledExpression:
    """Scalar and numpy-vectorised callables generated from one expression tree."""

    expression: Expression
    scalar: Callable[[float], float]
    vector: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x: float) -> float:
        return self.scalar(x)


_SCALAR_TEMPLATE = """
def _compiled(x):
    try:
        return {src}
    except ZeroDivisionError:
        raise EvaluationError("division by zero evaluating {text} at x=%r" % (x,)) from None
    except OverflowError:
        return _inf
"""


def compile_expression(e: Expression) -> CompiledExpression:
    src = e._source()
    text = to_text(e).replace('"', "'")
    scalar_ns: Dict[str, object] = {
        "exp": _safe_exp,
        "EvaluationError": EvaluationError,
        "_inf": math.inf,
    }
    exec(_SCALAR_TEMPLATE.format(src=src, text=text), scalar_ns)  # noqa: S102
    scalar = scalar_ns["_compiled"]

    vector_code = compile(src, "<expression>", "eval")

    def vector(xs: np.ndarray) -> np.ndarray:
        arr = np.asarray(xs, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = eval(vector_code, {"exp": np.exp, "x": arr})  # noqa: S307
        return np.asarray(out, dtype=float) + np.zeros_like(arr)

    return CompiledExpression(expression=e, scalar=scalar, vector=vector)  # type: ignore[arg-type]


def substitute_x(e: Expression, replacement: Expression) -> Expression:
    """Replace every occurrence of x by `replacement` (used to build x*g(x), g(-x) etc.)."""
    if isinstance(e, Var):
        return replacement
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return add(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Sub):
        return sub(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Mul):
        return mul(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Div):
        return div(substitute_x(e.left, replacement), substitute_x(e.right, replacement))
    if isinstance(e, Pow):
        return power(substitute_x(e.base, replacement), e.exponent)
    if isinstance(e, Neg):
        return neg(substitute_x(e.operand, replacement))
    if isinstance(e, Exp):
        return exp(substitute_x(e.argument, replacement))
    raise TypeError(f"unknown expression node {type(e).__name__}")
