from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from services.symbolic.expression import CompiledExpression, Expression, compile_expression, div, neg
from services.symbolic.sign_analysis import zeros_and_poles
from services.system.equation import EquationSpec, is_identically_zero

logger = logging.getLogger(__name__)

XRange = Tuple[float, float]


class IsoclineError(ValueError):
    """Isoclines requested for a spec without a usable f_2."""


@dataclass(frozen=True)
class IsoclineBranch:
    """
    One branch y = F_1(x) + sign*sqrt(-g(x)/f_2(x)) over [lo, hi] (sign = +1/-1),
    or the infinity isocline y = F_1(x) (sign = 0). Coordinates are the shifted
    ones, y = v + F_1(u).
    """

    sign: int
    lo: float
    hi: float
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    leftmost_upper: bool = False

    @property
    def label(self) -> str:
        if self.sign == 0:
            return "y=F_1"
        return "y+" if self.sign > 0 else "y-"

    @property
    def formula(self) -> str:
        if self.sign == 0:
            return "F_1(x)"
        op = "+" if self.sign > 0 else "-"
        return f"F_1(x) {op} sqrt(-g(x)/f_2(x))"

    def __len__(self) -> int:
        return int(self.x.size)


def _check_spec(spec: EquationSpec) -> None:
    if spec.n != 2:
        raise IsoclineError(f"zero-isoclines are defined for n=2, got n={spec.n}")
    if is_identically_zero(spec.coefficient(2)):
        raise IsoclineError("f_2 is identically zero; the zero-isocline has no branches")


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def _contains(points: Sequence[float], p: float) -> bool:
    return any(_close(p, q) for q in points)


def branch_domains(spec: EquationSpec, xrange: XRange) -> List[XRange]:
    """Maximal subintervals of xrange on which -g/f_2 >= 0."""
    _check_spec(spec)
    lo, hi = float(xrange[0]), float(xrange[1])
    if not lo < hi:
        raise IsoclineError(f"empty x-range {xrange}")

    g_zeros, g_poles = zeros_and_poles(spec.g, lo, hi)
    f2_zeros, f2_poles = zeros_and_poles(spec.coefficient(2), lo, hi)
    # points where the branch cannot continue through
    barriers = f2_zeros + f2_poles + g_poles
    breaks = sorted({lo, hi, *g_zeros, *barriers})

    radicand = compile_expression(radicand_expression(spec))
    kept: List[XRange] = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (a + b)
        value = radicand.vector(np.array([mid]))[0]
        if not (np.isfinite(value) and value >= 0):
            continue
        if kept and _close(kept[-1][1], a) and not _contains(barriers, a):
            kept[-1] = (kept[-1][0], b)
        else:
            kept.append((a, b))
    return kept


def _branch_values(spec: EquationSpec, radicand: CompiledExpression, xs: np.ndarray, sign: int) -> Tuple[np.ndarray, np.ndarray]:
    rho = radicand.vector(xs)
    ok = np.isfinite(rho) & (rho >= 0)
    xs = xs[ok]
    ys = spec.F1.evaluate_array(xs) + sign * np.sqrt(rho[ok])
    return xs, ys


def _refine(spec: EquationSpec, radicand: CompiledExpression, xs: np.ndarray, sign: int, clip: float, passes: int, max_points: int):
    xs, ys = _branch_values(spec, radicand, xs, sign)
    for _ in range(passes):
        keep = np.abs(ys) <= clip
        if xs.size < 2:
            break
        jump = np.abs(np.diff(ys))
        finite_span = ys[keep]
        scale = float(np.ptp(finite_span)) if finite_span.size > 1 else 1.0
        threshold = max(scale, 1e-6) / 100.0
        wide = np.diff(xs) > 1e-9
        needs = (jump > threshold) & wide & (np.abs(ys[:-1]) <= clip) & (np.abs(ys[1:]) <= clip)
        if not np.any(needs) or xs.size >= max_points:
            break
        mids = 0.5 * (xs[:-1][needs] + xs[1:][needs])
        mx, my = _branch_values(spec, radicand, mids, sign)
        order = np.argsort(np.concatenate([xs, mx]), kind="stable")
        xs = np.concatenate([xs, mx])[order]
        ys = np.concatenate([ys, my])[order]
    keep = np.abs(ys) <= clip
    return xs[keep], ys[keep]


def isoclines(
    spec: EquationSpec,
    xrange: XRange,
    *,
    samples: int = 401,
    clip: float = 1e3,
    passes: int = 8,
    max_points: int = 20000,
) -> List[IsoclineBranch]:
    """
    Zero-isocline branches y = F_1(x) +/- sqrt(-g(x)/f_2(x)) over every maximal
    subinterval of xrange where the radicand is nonnegative. Samples are
    cosine-spaced and refined where the branch is steep; points above `clip` in
    absolute value are dropped (branches blow up at zeros of f_2).
    """
    domains = branch_domains(spec, xrange)
    radicand = compile_expression(radicand_expression(spec))
    theta = np.linspace(0.0, np.pi, samples)
    branches: List[IsoclineBranch] = []
    for a, b in domains:
        xs = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(theta)
        xs[0], xs[-1] = a, b
        for sign in (1, -1):
            bx, by = _refine(spec, radicand, xs, sign, clip, passes, max_points)
            if bx.size == 0:
                continue
            branches.append(IsoclineBranch(sign=sign, lo=a, hi=b, x=bx, y=by))

    uppers = [br for br in branches if br.sign > 0]
    if uppers:
        left = min(uppers, key=lambda br: br.lo)
        branches = [
            IsoclineBranch(sign=br.sign, lo=br.lo, hi=br.hi, x=br.x, y=br.y, leftmost_upper=True) if br is left else br
            for br in branches
        ]
    logger.debug(
        "isoclines for %s on [%g, %g]: %d branch(es) over %s",
        spec.name or "spec", xrange[0], xrange[1], len(branches), domains,
    )
    return branches


def infinity_isocline(spec: EquationSpec, xrange: XRange, *, samples: int = 401) -> IsoclineBranch:
    """Samples of y = F_1(x), where v = 0 in the phase plane."""
    lo, hi = float(xrange[0]), float(xrange[1])
    if not lo < hi:
        raise IsoclineError(f"empty x-range {xrange}")
    xs = np.linspace(lo, hi, samples)
    return IsoclineBranch(sign=0, lo=lo, hi=hi, x=xs, y=spec.F1.evaluate_array(xs))


def radicand_expression(spec: EquationSpec) -> Expression:
    """-g/f_2, the radicand of the zero-isocline branches."""
    _check_spec(spec)
    return div(neg(spec.g), spec.coefficient(2))


def upper_left(branches: Sequence[IsoclineBranch]) -> Optional[IsoclineBranch]:
    return next((br for br in branches if br.leftmost_upper), None)
