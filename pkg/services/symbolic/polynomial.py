from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

Scalar = Union[int, Fraction]


def _trim(coeffs: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class Polynomial:
    """
    Exact univariate polynomial over the rationals.

    Coefficients are stored low-to-high with trailing zeros removed, so the leading
    coefficient is nonzero unless the polynomial is identically zero (degree -1).
    """

    __slots__ = ("coeffs", "_float_coeffs")

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        self.coeffs: Tuple[Fraction, ...] = _trim([Fraction(c) for c in coeffs])
        self._float_coeffs = tuple(float(c) for c in reversed(self.coeffs))

    # ---------- construction ----------

    @classmethod
    def constant(cls, c: Scalar) -> "Polynomial":
        return cls([c])

    @classmethod
    def monomial(cls, degree: int, c: Scalar = 1) -> "Polynomial":
        return cls([0] * degree + [c])

    @classmethod
    def x(cls) -> "Polynomial":
        return cls([0, 1])

    # ---------- queries ----------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        return self.evaluate_float(x)

    def evaluate_float(self, x):
        """Horner evaluation in floating point; accepts floats or numpy arrays."""
        acc = 0.0 * x
        for c in self._float_coeffs:
            acc = acc * x + c
        return acc

    def sign_at(self, x: Scalar) -> int:
        v = self(Fraction(x))
        return (v > 0) - (v < 0)

    def sign_at_infinity(self, side: int) -> int:
        """Eventual sign as x -> side*inf (side = +1 or -1)."""
        if self.is_zero:
            return 0
        lead = 1 if self.leading_coefficient > 0 else -1
        return lead if (side > 0 or self.degree % 2 == 0) else -lead

    # ---------- arithmetic ----------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(self.coefficient(k) + other.coefficient(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other) -> "Polynomial":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError(f"negative polynomial power {n}")
        out = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, divisor: "Polynomial") -> Tuple["Polynomial", "Polynomial"]:
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = divisor.degree
        lead = divisor.leading_coefficient
        quot = [Fraction(0)] * max(0, len(rem) - dd)
        while len(rem) - 1 >= dd and rem:
            k = len(rem) - 1 - dd
            factor = rem[-1] / lead
            quot[k] = factor
            for i, c in enumerate(divisor.coeffs):
                rem[k + i] -= factor * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return Polynomial(quot), Polynomial(rem)

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(_as_poly(other))[0]

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(_as_poly(other))[1]

    def scale(self, c: Scalar) -> "Polynomial":
        return Polynomial(Fraction(c) * a for a in self.coeffs)

    def monic(self) -> "Polynomial":
        if self.is_zero:
            return self
        return self.scale(1 / self.leading_coefficient)

    def derivative(self) -> "Polynomial":
        return Polynomial(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def antiderivative(self) -> "Polynomial":
        """Primitive vanishing at 0."""
        return Polynomial([Fraction(0)] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def without_constant(self) -> "Polynomial":
        return Polynomial([Fraction(0)] + list(self.coeffs[1:]))

    def reflect(self) -> "Polynomial":
        """p(-x)."""
        return Polynomial(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs))

    def cauchy_bound(self) -> Fraction:
        """Every real root lies in (-B, B)."""
        if self.degree < 1:
            return Fraction(1)
        lead = abs(self.leading_coefficient)
        return 1 + max(abs(c) / lead for c in self.coeffs[:-1])

    def to_expression(self):
        from services.symbolic.expression import X, Const, ZERO, add, mul, power

        out = ZERO
        for k, c in enumerate(self.coeffs):
            if c != 0:
                out = add(out, mul(Const(c), power(X, k)))
        return out

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts: List[str] = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mag = abs(c)
            coef = "" if (mag == 1 and k > 0) else str(mag)
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            body = f"{coef}*{mono}" if coef and mono else (coef or mono)
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {body}" if parts else (f"-{body}" if c < 0 else body))
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


def _as_poly(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction)):
        return Polynomial.constant(value)
    raise TypeError(f"cannot combine Polynomial with {type(value).__name__}")


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd over Q (zero when both inputs are zero)."""
    while not b.is_zero:
        a, b = b, a % b
    return a.monic()


def poly_lcm(a: Polynomial, b: Polynomial) -> Polynomial:
    if a.is_zero or b.is_zero:
        return Polynomial()
    return ((a * b) // poly_gcd(a, b)).monic()


def square_free_decomposition(p: Polynomial) -> List[Tuple[Polynomial, int]]:
    """
    Factors (s_i, i) with p = lead * prod s_i^i, each s_i square-free and pairwise
    coprime. Characteristic zero, so the repeated-gcd scheme terminates.
    """
    if p.degree < 1:
        return []
    out: List[Tuple[Polynomial, int]] = []
    c = poly_gcd(p, p.derivative())
    w = p // c
    i = 1
    while w.degree > 0:
        y = poly_gcd(w, c)
        z = w // y
        if z.degree > 0:
            out.append((z.monic(), i))
        w = y
        c = c // y
        i += 1
    return out


def square_free_part(p: Polynomial) -> Polynomial:
    if p.degree < 1:
        return p
    return (p // poly_gcd(p, p.derivative())).monic()
