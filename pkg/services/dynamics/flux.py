"""
Flux diagnostics: the rate of change of an energy-like function along the
flow, sampled on a closed curve.

  oval flux     d/dt (y^2/2 + G(x)) = -g F_1 - y f_2 (y - F_1)^2
                on {y^2/2 + G(x) = r^2}, in the coordinates y = v + F_1(u)
  circle flux   d/dt (x^2 + y^2) = -2 y^2 (f_1 + sum_l f_{2l+1} y^(2l))
                on {x^2 + y^2 = r^2}, for g = x and odd powers of y only
  Lienard flux  -x F_1(x), the circle flux of x' = y - F_1(x), y' = -x
"""
from __future__ import annotations

import logging
from typing import Callable, Optional

import numpy as np

from config import settings
from dto.dynamics_dto import FluxSummary
from services.symbolic.antiderivative import Antiderivative
from services.symbolic.expression import Expression
from services.system.equation import EquationSpec
from services.transforms.lienard import level_crossing

logger = logging.getLogger(__name__)

# |value| at or below this (relative to the sample scale) counts as zero
ZERO_RTOL = 1e-13


class FluxError(ValueError):
    """The requested curve is empty or not closed."""


class StructuralFormError(ValueError):
    """Equation is not x'' + f_1 x' + sum f_{2l+1} x'^(2l+1) + x = 0."""


def summarize(values: np.ndarray, *, forced_zero: Optional[np.ndarray] = None, note: str = "") -> FluxSummary:
    """
    Sign of a sampled flux. Samples flagged in `forced_zero` (where the flux
    vanishes for structural reasons) are left out of the classification.
    """
    vals = np.asarray(values, dtype=float)
    keep = np.ones(vals.shape, dtype=bool) if forced_zero is None else ~np.asarray(forced_zero, dtype=bool)
    kept = vals[keep]
    if kept.size == 0:
        return FluxSummary(samples=int(vals.size), minimum=0.0, maximum=0.0, sign="zero", note=note)
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    atol = ZERO_RTOL * max(scale, 1e-300)
    lo, hi = float(np.min(kept)), float(np.max(kept))
    if scale == 0.0 or (abs(lo) <= atol and abs(hi) <= atol):
        sign = "zero"
    elif lo > atol:
        sign = "positive"
    elif hi < -atol:
        sign = "negative"
    else:
        sign = "mixed"
    skipped = int(vals.size - kept.size)
    if skipped:
        note = (note + "; " if note else "") + f"{skipped} structural zero sample(s) excluded"
    return FluxSummary(samples=int(vals.size), minimum=float(np.min(vals)), maximum=float(np.max(vals)), sign=sign, note=note)


# ───────────────────────────────────────────────
# Ovals of y^2/2 + G(x)
# ───────────────────────────────────────────────

def oval_points(spec: EquationSpec, r: float, samples: int = 512, *, x_limit: Optional[float] = None) -> np.ndarray:
    """`samples` points of {y^2/2 + G(x) = r^2}, upper arc left to right then lower arc back."""
    if not r > 0:
        raise FluxError(f"oval radius must be positive, got {r}")
    if samples < 4:
        raise ValueError(f"need at least 4 samples, got {samples}")
    limit = float(x_limit if x_limit is not None else settings.sign_window)
    level = r * r
    right, right_closed = level_crossing(spec.G, level, 1, limit)
    left, left_closed = level_crossing(spec.G, level, -1, limit)
    if not (right_closed and left_closed):
        raise FluxError(f"oval at r={r} is not closed within |x| <= {limit}")

    half = samples // 2
    theta = np.linspace(0.0, np.pi, half + 1)
    xs = 0.5 * (right - left) - 0.5 * (right + left) * np.cos(theta)
    xs[0], xs[-1] = -left, right
    rad = np.maximum(0.0, 2.0 * (level - spec.G.evaluate_array(xs)))
    rad[0] = rad[-1] = 0.0
    ys = np.sqrt(rad)
    upper = np.column_stack([xs, ys])
    lower = np.column_stack([xs[::-1], -ys[::-1]])[1:-1]
    return np.vstack([upper, lower])


def oval_flux_integrand(spec: EquationSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """-g(x) F_1(x) - y f_2(x) (y - F_1(x))^2, vectorised over samples."""
    if spec.n > 2:
        raise FluxError(f"oval flux needs n <= 2, got n={spec.n}")
    padded = spec.padded(2)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = padded.compiled[0].vector(x)
    f2 = padded.compiled[2].vector(x)
    F1 = padded.F1.evaluate_array(x)
    v = y - F1
    return -g * F1 - y * f2 * v * v


def oval_flux(spec: EquationSpec, r: float, samples: int = 512) -> FluxSummary:
    """Signed flux through the oval of energy r^2; samples on x = 0 (where it is forced to vanish when f_2(0) = 0) are excluded."""
    pts = oval_points(spec, r, samples)
    vals = oval_flux_integrand(spec, pts[:, 0], pts[:, 1])
    forced = np.abs(pts[:, 0]) <= 1e-12 * max(1.0, r)
    summary = summarize(vals, forced_zero=forced, note=f"r={r:g}")
    logger.debug("oval flux at r=%g: %s [%.3e, %.3e]", r, summary.sign, summary.minimum, summary.maximum)
    return summary


# ───────────────────────────────────────────────
# Circles, odd-damping form
# ───────────────────────────────────────────────

def massera_alpha(spec: EquationSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """-2 y^2 (f_1(x) + sum_{l>=1} f_{2l+1}(x) y^(2l))."""
    reason = spec.odd_damping_violation()
    if reason is not None:
        raise StructuralFormError(f"circle flux needs the odd-damping form: {reason}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    y2 = y * y
    acc = np.zeros_like(x)
    for l in sorted((l for l in spec.nonzero_indices if l % 2 == 1), reverse=True):
        acc = acc + spec.compiled[l].vector(x) * y2 ** ((l - 1) // 2)
    return -2.0 * y2 * acc


def massera_circle_flux(spec: EquationSpec, r: float, samples: int = 512) -> FluxSummary:
    """
    Flux through the circle of radius r. Samples are offset by half a step so
    none lands on y = 0, where the flux vanishes identically.
    """
    if not r > 0:
        raise FluxError(f"circle radius must be positive, got {r}")
    theta = 2.0 * np.pi * (np.arange(samples) + 0.5) / samples
    xs, ys = r * np.cos(theta), r * np.sin(theta)
    vals = massera_alpha(spec, xs, ys)
    return summarize(vals, forced_zero=np.abs(ys) <= 1e-15 * r, note=f"r={r:g}")


def lienard_circle_flux(f1: Expression) -> Callable[[np.ndarray], np.ndarray]:
    """x -> -x F_1(x); one-signed means circles are crossed one way only."""
    F1 = Antiderivative(f1, label="F_1")

    def flux(x) -> np.ndarray:
        xs = np.asarray(x, dtype=float)
        return -xs * F1.evaluate_array(xs)

    return flux
