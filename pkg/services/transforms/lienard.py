"""
Transformation of the two-term phase-plane system

    u' = v,   v' = -f_1(u) v - f_2(u) v^2 - g(u)

into the Lienard system  x' = y - F~(x),  y' = -g~(x)  (time tau with
dtau = exp(-F_2(x)) dt), where

    E(x)  = exp(integral_0^x f_2)
    F~(x) = integral_0^x f_1(s) E(s) ds
    g~(x) = g(x) E(x)^2,   G~(x) = integral_0^x g~

and x = u, y = v E(u) + F~(u).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from config import settings
from services.symbolic.antiderivative import Antiderivative, QuadratureError
from services.symbolic.asymptotics import ExpSum, tail_asymptote, to_exp_sum
from services.symbolic.rational import RationalFunction, to_polynomial
from services.system.equation import EquationSpec, is_identically_zero

logger = logging.getLogger(__name__)


class TransformError(ValueError):
    """Transformation requested outside its domain (n > 2)."""


class CenterKind(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"
    UNKNOWN = "unknown"


def _exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


class LienardImage:
    """F~, g~, G~ and E for one spec with n <= 2. Primitives are cached per instance."""

    def __init__(self, spec: EquationSpec):
        if spec.n > 2:
            raise TransformError(f"the Lienard transformation needs n <= 2, got n={spec.n}")
        self.spec = spec.padded(2)
        self._f1 = self.spec.compiled[1].scalar
        self._g = self.spec.compiled[0].scalar
        self.F2 = Antiderivative(self.spec.coefficient(2), tol=settings.quad_inner_tol, label="F_2")
        self.flat = is_identically_zero(self.spec.coefficient(2))
        if self.flat:
            self.F_tilde = self.spec.F1
            self.G_tilde = self.spec.G
        else:
            self.F_tilde = Antiderivative(
                lambda s: self._f1(s) * self.E(s), tol=settings.quad_outer_tol, label="F~"
            )
            self.G_tilde = Antiderivative(self.g_tilde, tol=settings.quad_outer_tol, label="G~")

    def E(self, x: float) -> float:
        return 1.0 if self.flat else _exp(self.F2(x))

    def g_tilde(self, x: float) -> float:
        e = self.E(x)
        return self._g(x) * e * e


@lru_cache(maxsize=64)
def lienard_image(spec: EquationSpec) -> LienardImage:
    return LienardImage(spec)


# ───────────────────────────────────────────────
# Point maps
# ───────────────────────────────────────────────

def forward(spec: EquationSpec, u: float, v: float) -> Tuple[float, float]:
    """Phase plane (u, v) -> Lienard plane (x, y)."""
    im = lienard_image(spec)
    return u, v * im.E(u) + im.F_tilde(u)


def inverse(spec: EquationSpec, x: float, y: float, *, unperturbed: bool = False) -> Tuple[float, float]:
    """Lienard plane (x, y) -> phase plane (u, v). `unperturbed` drops f_1 (F~ = 0)."""
    im = lienard_image(spec)
    shift = 0.0 if unperturbed else im.F_tilde(x)
    return x, (y - shift) / im.E(x)


def time_rescale_factor(spec: EquationSpec, x: float) -> float:
    """dtau/dt = exp(-F_2(x))."""
    im = lienard_image(spec)
    return 1.0 / im.E(x)


def lienard_field(spec: EquationSpec, x: float, y: float) -> Tuple[float, float]:
    im = lienard_image(spec)
    return y - im.F_tilde(x), -im.g_tilde(x)


def hamiltonian(spec: EquationSpec, x: float, y: float) -> float:
    """H = y^2/2 + G~(x), first integral of the unperturbed (f_1 = 0) Lienard system."""
    return 0.5 * y * y + lienard_image(spec).G_tilde(x)


# ───────────────────────────────────────────────
# Center classification
# ───────────────────────────────────────────────

def _numeric_tail_unbounded(im: LienardImage, side: int) -> Optional[bool]:
    xs = [side * 10.0 * 2 ** k for k in range(4)]
    try:
        values = [im.G_tilde(x) for x in xs]
    except QuadratureError:
        return True
    if not all(math.isfinite(v) for v in values):
        return True
    steps = np.abs(np.diff(values))
    if steps[-1] >= steps[0]:
        return True
    if steps[-1] < 0.25 * steps[-2]:
        return False
    return None


def center_kind(spec: EquationSpec) -> CenterKind:
    """
    Global when G~ is unbounded on both sides (every energy level is a closed
    curve), local otherwise. Exact for polynomial f_2 and g in the exp-sum class.
    """
    im = lienard_image(spec)
    f2 = to_polynomial(im.spec.coefficient(2))
    g = to_exp_sum(im.spec.g)
    if f2 is not None and g is not None:
        weight = ExpSum({f2.antiderivative().scale(2): RationalFunction.constant(1)})
        gt = g * weight
        unbounded = [tail_asymptote(gt, side).primitive().is_divergent for side in (1, -1)]
        return CenterKind.GLOBAL if all(unbounded) else CenterKind.LOCAL

    verdicts = [_numeric_tail_unbounded(im, side) for side in (1, -1)]
    if any(v is False for v in verdicts):
        return CenterKind.LOCAL
    if all(v is True for v in verdicts):
        return CenterKind.GLOBAL
    return CenterKind.UNKNOWN


# ───────────────────────────────────────────────
# Energy levels
# ───────────────────────────────────────────────

@dataclass(frozen=True)
class LevelCurve:
    """
    {H = level} of the unperturbed system, as polylines in the Lienard plane and
    pulled back to the phase plane. tag: closed | open | point | empty.
    """

    level: float
    tag: str
    lienard: Tuple[np.ndarray, ...] = field(default=(), repr=False)
    phase: Tuple[np.ndarray, ...] = field(default=(), repr=False)

    @property
    def closed(self) -> bool:
        return self.tag == "closed"


def level_crossing(G: Callable[[float], float], level: float, side: int, x_limit: float) -> Tuple[float, bool]:
    """|x| on the given side where G~ reaches `level`, and whether it does within x_limit."""

    def safe(t: float) -> float:
        try:
            return G(side * t)
        except QuadratureError:
            return math.inf

    a, b = 0.0, min(0.25, x_limit)
    while True:
        val = safe(b)
        if not math.isfinite(val) or val >= level:
            break
        if b >= x_limit:
            return x_limit, False
        a, b = b, min(2.0 * b, x_limit)
    while not math.isfinite(safe(b)):
        mid = 0.5 * (a + b)
        if safe(mid) < level:
            a = mid
        else:
            b = mid
    root = brentq(lambda t: safe(t) - level, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return float(root), True


def _to_phase(spec: EquationSpec, pts: np.ndarray) -> np.ndarray:
    im = lienard_image(spec)
    out = pts.copy()
    out[:, 1] = [y / im.E(x) for x, y in pts]
    return out


def level_pullback(
    spec: EquationSpec,
    level: float,
    *,
    resolution: int = 400,
    x_limit: Optional[float] = None,
) -> LevelCurve:
    """
    Sample {y^2/2 + G~(x) = level} with x cosine-spaced between the two turning
    points (y = +/- sqrt(2(level - G~))) and map every point to the phase plane.
    A side on which G~ stays below the level up to x_limit is truncated there
    and the curve is tagged open.
    """
    x_limit = float(x_limit if x_limit is not None else settings.portrait_window)
    if level < 0:
        return LevelCurve(level=level, tag="empty")
    if level == 0:
        origin = np.zeros((1, 2))
        return LevelCurve(level=level, tag="point", lienard=(origin,), phase=(origin,))

    im = lienard_image(spec)
    right, right_closed = level_crossing(im.G_tilde, level, 1, x_limit)
    left, left_closed = level_crossing(im.G_tilde, level, -1, x_limit)
    lo, hi = -left, right

    theta = np.linspace(0.0, np.pi, resolution)
    xs = 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(theta)
    xs[0], xs[-1] = lo, hi
    rad = np.array([max(0.0, 2.0 * (level - im.G_tilde(x))) for x in xs])
    if left_closed:
        rad[0] = 0.0
    if right_closed:
        rad[-1] = 0.0
    ys = np.sqrt(rad)
    upper = np.column_stack([xs, ys])
    lower = np.column_stack([xs[::-1], -ys[::-1]])

    pieces: List[np.ndarray]
    if left_closed and right_closed:
        ring = np.vstack([upper, lower[1:]])
        pieces = [ring]
        tag = "closed"
    elif left_closed:
        # open to the right: lower edge point -> around the left turning point -> upper edge point
        pieces = [np.vstack([lower, upper[1:]])]
        tag = "open"
    elif right_closed:
        pieces = [np.vstack([upper, lower[1:]])]
        tag = "open"
    else:
        pieces = [upper, lower]
        tag = "open"

    logger.debug("level %.6g: [%g, %g], %s", level, lo, hi, tag)
    return LevelCurve(
        level=level,
        tag=tag,
        lienard=tuple(pieces),
        phase=tuple(_to_phase(spec, p) for p in pieces),
    )
