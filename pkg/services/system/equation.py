from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from services.symbolic.antiderivative import Antiderivative
from services.symbolic.asymptotics import to_exp_sum
from services.symbolic.expression import (
    ZERO,
    CompiledExpression,
    Expression,
    compile_expression,
)
from services.symbolic.parser import ExpressionSyntaxError, ParameterValue, parse
from services.symbolic.polynomial import Polynomial
from services.symbolic.rational import to_polynomial

logger = logging.getLogger(__name__)


class SpecError(ValueError):
    """Malformed equation definition."""


@dataclass(frozen=True)
class PolynomialQuadruple:
    """p x'' + p q1 x' + q2 x'^2 + r = 0 with real polynomials."""

    p: Polynomial
    q1: Polynomial
    q2: Polynomial
    r: Polynomial


def is_identically_zero(e: Expression) -> bool:
    es = to_exp_sum(e)
    if es is not None:
        return es.is_zero
    xs = np.linspace(-10.0, 10.0, 2001)
    values = compile_expression(e).vector(xs)
    return bool(np.all(values[np.isfinite(values)] == 0.0))


@dataclass(frozen=True)
class EquationSpec:
    """
    x'' + sum_{l=0}^{n} f_l(x) x'^l = 0, with f_0 = g.

    Immutable; compiled callables and primitives are built on first use and
    shared by every consumer of the spec.
    """

    coefficients: Tuple[Expression, ...]
    texts: Tuple[str, ...] = ()
    name: str = ""
    parameters: Tuple[Tuple[str, str], ...] = ()
    quadruple: Optional[PolynomialQuadruple] = field(default=None, compare=False)
    # padded views (n raised with zero slots) may end in a zero coefficient
    padded_view: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.coefficients:
            raise SpecError("empty coefficient list")
        if not self.padded_view and len(self.coefficients) > 1 and is_identically_zero(self.coefficients[-1]):
            raise SpecError(f"leading coefficient f_{len(self.coefficients) - 1} is identically zero")
        if self.texts and len(self.texts) != len(self.coefficients):
            raise SpecError("texts and coefficients differ in length")

    # ---------- construction ----------

    @classmethod
    def from_texts(
        cls,
        texts: Sequence[str],
        *,
        parameters: Optional[Mapping[str, ParameterValue]] = None,
        name: str = "",
        n: Optional[int] = None,
    ) -> "EquationSpec":
        texts = [str(t) for t in texts]
        if not texts:
            raise SpecError("empty coefficient list")
        if n is not None and n != len(texts) - 1:
            raise SpecError(f"n={n} but {len(texts)} coefficients given (expected n+1)")
        coeffs = []
        for l, text in enumerate(texts):
            try:
                coeffs.append(parse(text, parameters))
            except ExpressionSyntaxError as e:
                raise SpecError(f"f_{l}: {e}") from e
        params = tuple(sorted((k, str(v)) for k, v in (parameters or {}).items()))
        return cls(coefficients=tuple(coeffs), texts=tuple(texts), name=name, parameters=params)

    @classmethod
    def from_quadruple(cls, quad: PolynomialQuadruple, *, name: str = "") -> "EquationSpec":
        """f_0 = r/p, f_1 = q1, f_2 = q2/p."""
        from services.symbolic.expression import div

        p = quad.p.to_expression()
        coeffs = (div(quad.r.to_expression(), p), quad.q1.to_expression(), div(quad.q2.to_expression(), p))
        texts = tuple(str(c) for c in coeffs)
        return cls(coefficients=coeffs, texts=texts, name=name, quadruple=quad)

    # ---------- structure ----------

    @property
    def n(self) -> int:
        return len(self.coefficients) - 1

    @property
    def g(self) -> Expression:
        return self.coefficients[0]

    def coefficient(self, l: int) -> Expression:
        """f_l, zero beyond n."""
        return self.coefficients[l] if 0 <= l <= self.n else ZERO

    def coefficient_text(self, l: int) -> str:
        if self.texts:
            return self.texts[l]
        return str(self.coefficients[l])

    @cached_property
    def compiled(self) -> Tuple[CompiledExpression, ...]:
        return tuple(compile_expression(c) for c in self.coefficients)

    @cached_property
    def nonzero_indices(self) -> Tuple[int, ...]:
        return tuple(l for l, c in enumerate(self.coefficients) if not is_identically_zero(c))

    def padded(self, n: int) -> "EquationSpec":
        """Same equation viewed with n+1 coefficient slots (zeros appended)."""
        if n <= self.n:
            return self
        coeffs = self.coefficients + (ZERO,) * (n - self.n)
        texts = (self.texts or tuple(str(c) for c in self.coefficients)) + ("0",) * (n - self.n)
        return EquationSpec(
            coefficients=coeffs,
            texts=texts,
            name=self.name,
            parameters=self.parameters,
            padded_view=True,
        )

    # ---------- primitives ----------

    @cached_property
    def F1(self) -> Antiderivative:
        return Antiderivative(self.coefficient(1), label="F_1")

    @cached_property
    def G(self) -> Antiderivative:
        return Antiderivative(self.g, label="G")

    @cached_property
    def F2(self) -> Antiderivative:
        return Antiderivative(self.coefficient(2), label="F_2")

    # ---------- vector field ----------

    def coefficient_values(self, x: float) -> List[float]:
        return [f.scalar(x) for f in self.compiled]

    def field(self, x: float, y: float) -> Tuple[float, float]:
        """(dx/dt, dy/dt) = (y, -sum_l f_l(x) y^l)."""
        acc = 0.0
        for f in reversed(self.compiled):
            acc = acc * y + f.scalar(x)
        return y, -acc

    def divergence(self, x: float, y: float) -> float:
        """-sum_{l>=1} l f_l(x) y^(l-1)."""
        acc = 0.0
        for l in range(self.n, 0, -1):
            acc = acc * y + l * self.compiled[l].scalar(x)
        return -acc

    def shifted_field(self, x: float, y: float) -> Tuple[float, float]:
        """
        Field in the coordinates (x, y) = (u, v + F_1(u)) for n <= 2:
        x' = y - F_1(x),  y' = -f_2(x) (y - F_1(x))^2 - g(x).
        """
        if self.n > 2:
            raise SpecError(f"shifted coordinates need n <= 2, got n={self.n}")
        v = y - self.F1(x)
        f2 = self.compiled[2].scalar(x) if self.n >= 2 else 0.0
        return v, -f2 * v * v - self.compiled[0].scalar(x)

    def rhs(self, *, with_divergence: bool = False) -> Callable[[float, np.ndarray], np.ndarray]:
        """State derivative for the integrator; the optional third slot accumulates the divergence."""
        fs = [f.scalar for f in self.compiled]
        n = self.n
        rev = list(reversed(fs))

        if not with_divergence:
            def _rhs(t: float, s: np.ndarray) -> np.ndarray:
                x, y = s[0], s[1]
                acc = 0.0
                for f in rev:
                    acc = acc * y + f(x)
                return np.array([y, -acc])

            return _rhs

        def _rhs_div(t: float, s: np.ndarray) -> np.ndarray:
            x, y = s[0], s[1]
            vals = [f(x) for f in fs]
            acc = 0.0
            dacc = 0.0
            for l in range(n, -1, -1):
                acc = acc * y + vals[l]
                if l >= 1:
                    dacc = dacc * y + l * vals[l]
            return np.array([y, -acc, -dacc])

        return _rhs_div

    def odd_damping_violation(self) -> Optional[str]:
        """
        None when the equation reads x'' + f_1 x' + sum_{l>=1} f_{2l+1} x'^(2l+1) + x = 0
        with at least one f_{2l+1}, l >= 1, present; otherwise the reason it does not.
        """
        if to_polynomial(self.g) != Polynomial.x():
            return f"g = {self.coefficient_text(0)} is not x"
        even = [l for l in self.nonzero_indices if l >= 2 and l % 2 == 0]
        if even:
            return f"even-power coefficient(s) f_{even} present"
        if not any(l >= 3 and l % 2 == 1 for l in self.nonzero_indices):
            return "no odd-power coefficient f_{2l+1} with l >= 1"
        return None

    # ---------- documents ----------

    def describe(self) -> str:
        terms = [f"f_{l} = {self.coefficient_text(l)}" for l in range(self.n + 1)]
        return f"{self.name or 'equation'} (n={self.n}): " + "; ".join(terms)


@dataclass(frozen=True)
class EquationFamily:
    """Coefficient templates with named parameters, e.g. the Hopf family in (a, b)."""

    texts: Tuple[str, ...]
    parameter_names: Tuple[str, ...]
    defaults: Dict[str, ParameterValue] = field(default_factory=dict, compare=False, hash=False)
    name: str = ""

    def instantiate(self, **values: ParameterValue) -> EquationSpec:
        bound: Dict[str, ParameterValue] = dict(self.defaults)
        bound.update(values)
        missing = [p for p in self.parameter_names if p not in bound]
        if missing:
            raise SpecError(f"family {self.name or 'equation'} needs values for {missing}")
        return EquationSpec.from_texts(self.texts, parameters=bound, name=self.name)

