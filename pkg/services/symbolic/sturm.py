from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from services.symbolic.polynomial import Polynomial, square_free_decomposition, square_free_part

DEFAULT_ROOT_WIDTH = Fraction(1, 2 ** 40)


class SignTag(str, Enum):
    EVERYWHERE_POSITIVE = "everywhere-positive"
    EVERYWHERE_NEGATIVE = "everywhere-negative"
    NONNEG_WITH_ZEROS = "nonneg-with-zeros"
    NONPOS_WITH_ZEROS = "nonpos-with-zeros"
    CHANGES_SIGN = "changes-sign"
    IDENTICALLY_ZERO = "identically-zero"
    INDETERMINATE = "indeterminate"


_NONNEG = {SignTag.EVERYWHERE_POSITIVE, SignTag.NONNEG_WITH_ZEROS, SignTag.IDENTICALLY_ZERO}
_NONPOS = {SignTag.EVERYWHERE_NEGATIVE, SignTag.NONPOS_WITH_ZEROS, SignTag.IDENTICALLY_ZERO}


@dataclass(frozen=True)
class RootInterval:
    """Isolating interval (lo, hi] holding exactly one real root; lo == hi when the root is exact."""

    lo: Fraction
    hi: Fraction

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def midpoint(self) -> float:
        return float((self.lo + self.hi) / 2)

    def __str__(self) -> str:
        if self.exact:
            return f"{float(self.lo):.12g}"
        return f"({float(self.lo):.12g}, {float(self.hi):.12g}]"


@dataclass(frozen=True)
class SignSummary:
    tag: SignTag
    roots: Tuple[RootInterval, ...] = ()
    exact: bool = True
    note: str = ""
    # witnesses for grid-based verdicts
    positive_at: Optional[float] = None
    negative_at: Optional[float] = None
    poles: Tuple[RootInterval, ...] = field(default=())

    @property
    def is_nonnegative(self) -> bool:
        return self.tag in _NONNEG

    @property
    def is_nonpositive(self) -> bool:
        return self.tag in _NONPOS

    @property
    def is_one_signed(self) -> bool:
        return self.is_nonnegative or self.is_nonpositive

    def describe(self) -> str:
        parts = [self.tag.value]
        if self.roots:
            parts.append("roots " + ", ".join(str(r) for r in self.roots))
        if self.poles:
            parts.append("poles " + ", ".join(str(r) for r in self.poles))
        if not self.exact:
            parts.append("(grid)")
        if self.note:
            parts.append(self.note)
        return "; ".join(parts)


def sturm_sequence(p: Polynomial) -> List[Polynomial]:
    """Canonical Sturm chain p, p', -rem(...), each scaled by a positive constant."""
    if p.is_zero:
        return []
    chain = [p, p.derivative()]
    while not chain[-1].is_zero:
        r = -(chain[-2] % chain[-1])
        if r.is_zero:
            break
        chain.append(r.scale(1 / abs(r.leading_coefficient)))
    if chain[-1].is_zero:
        chain.pop()
    return chain


def _variations(signs: Sequence[int]) -> int:
    nz = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def sign_variations(chain: Sequence[Polynomial], x: Fraction) -> int:
    return _variations([q.sign_at(x) for q in chain])


def sign_variations_at_infinity(chain: Sequence[Polynomial], side: int) -> int:
    return _variations([q.sign_at_infinity(side) for q in chain])


def count_real_roots(p: Polynomial, lo: Optional[Fraction] = None, hi: Optional[Fraction] = None) -> int:
    """Distinct real roots in (lo, hi]; None means the corresponding infinity."""
    if p.is_zero:
        raise ValueError("root count of the zero polynomial is undefined")
    chain = sturm_sequence(square_free_part(p))
    v_lo = sign_variations_at_infinity(chain, -1) if lo is None else sign_variations(chain, Fraction(lo))
    v_hi = sign_variations_at_infinity(chain, +1) if hi is None else sign_variations(chain, Fraction(hi))
    return v_lo - v_hi


def isolate_real_roots(p: Polynomial, width: Fraction = DEFAULT_ROOT_WIDTH) -> List[RootInterval]:
    """All distinct real roots of p, each in an interval no wider than `width`, ascending."""
    if p.is_zero:
        raise ValueError("cannot isolate roots of the zero polynomial")
    s = square_free_part(p)
    if s.degree < 1:
        return []
    chain = sturm_sequence(s)
    bound = s.cauchy_bound()

    def count(a: Fraction, b: Fraction) -> int:
        return sign_variations(chain, a) - sign_variations(chain, b)

    found: List[RootInterval] = []
    stack: List[Tuple[Fraction, Fraction]] = [(-bound, bound)]
    while stack:
        lo, hi = stack.pop()
        n = count(lo, hi)
        if n == 0:
            continue
        if n > 1:
            mid = (lo + hi) / 2
            stack.append((mid, hi))
            stack.append((lo, mid))
            continue
        found.append(_refine(s, chain, lo, hi, width))
    found.sort(key=lambda r: r.lo)
    return found


def _refine(s: Polynomial, chain: Sequence[Polynomial], lo: Fraction, hi: Fraction, width: Fraction) -> RootInterval:
    if s.sign_at(hi) == 0:
        return RootInterval(hi, hi)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if s.sign_at(mid) == 0:
            return RootInterval(mid, mid)
        if sign_variations(chain, lo) - sign_variations(chain, mid) == 1:
            hi = mid
        else:
            lo = mid
    return RootInterval(lo, hi)


def sturm_sign_analysis(p: Polynomial, width: Fraction = DEFAULT_ROOT_WIDTH) -> SignSummary:
    """
    Exact global sign of p on the real line.

    p changes sign iff some odd-multiplicity square-free factor has a real root;
    otherwise its sign away from the zeros is the sign of the leading coefficient.
    """
    if p.is_zero:
        return SignSummary(tag=SignTag.IDENTICALLY_ZERO)
    roots = tuple(isolate_real_roots(p, width)) if p.degree > 0 else ()
    lead_positive = p.leading_coefficient > 0
    if not roots:
        tag = SignTag.EVERYWHERE_POSITIVE if lead_positive else SignTag.EVERYWHERE_NEGATIVE
        return SignSummary(tag=tag)
    odd_part = Polynomial.constant(1)
    for factor, multiplicity in square_free_decomposition(p):
        if multiplicity % 2 == 1:
            odd_part = odd_part * factor
    if odd_part.degree > 0 and count_real_roots(odd_part) > 0:
        return SignSummary(tag=SignTag.CHANGES_SIGN, roots=roots)
    tag = SignTag.NONNEG_WITH_ZEROS if lead_positive else SignTag.NONPOS_WITH_ZEROS
    return SignSummary(tag=tag, roots=roots)
