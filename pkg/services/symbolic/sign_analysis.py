from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from config import settings
from services.symbolic.asymptotics import to_exp_sum
from services.symbolic.expression import Expression, compile_expression
from services.symbolic.sturm import SignSummary, SignTag, isolate_real_roots, sturm_sign_analysis

logger = logging.getLogger(__name__)


def sample_grid(window: float, points: int) -> np.ndarray:
    """Uniform grid on [-window, window] merged with a geometric grid clustering at 0."""
    uniform = np.linspace(-window, window, points)
    decades = np.geomspace(1e-6, window, max(64, points // 50))
    return np.unique(np.concatenate([uniform, decades, -decades, [0.0]]))


def grid_sign_summary(e: Expression, *, window: float, points: int) -> SignSummary:
    """
    Sign on a dense grid. A sign change found on the grid is a certified
    changes-sign; a one-signed grid proves nothing beyond the window.
    """
    xs = sample_grid(window, points)
    values = compile_expression(e).vector(xs)
    finite = np.isfinite(values)
    vals = values[finite]
    xs_f = xs[finite]
    pos = np.nonzero(vals > 0)[0]
    neg = np.nonzero(vals < 0)[0]
    positive_at = float(xs_f[pos[0]]) if pos.size else None
    negative_at = float(xs_f[neg[0]]) if neg.size else None
    if pos.size and neg.size:
        return SignSummary(
            tag=SignTag.CHANGES_SIGN,
            exact=False,
            positive_at=positive_at,
            negative_at=negative_at,
            note=f"witnesses f({positive_at:.6g})>0, f({negative_at:.6g})<0",
        )
    if pos.size:
        observed = "positive" if not np.any(vals == 0) else "nonnegative"
    elif neg.size:
        observed = "negative" if not np.any(vals == 0) else "nonpositive"
    else:
        observed = "zero"
    return SignSummary(
        tag=SignTag.INDETERMINATE,
        exact=False,
        positive_at=positive_at,
        negative_at=negative_at,
        note=f"{observed} on the grid over [-{window:g}, {window:g}], no certificate beyond it",
    )


def zeros_and_poles(e: Expression, lo: float, hi: float, *, points: int = 4001) -> Tuple[List[float], List[float]]:
    """
    Real zeros and poles of e inside (lo, hi), ascending. Exact root isolation in
    the exp-sum single-term class; otherwise grid sign changes refined by brentq
    (poles are then the non-finite grid points).
    """
    es = to_exp_sum(e)
    if es is not None and es.is_zero:
        return [], []
    term = es.single_term if es is not None else None
    if term is not None:
        r, _ = term
        zeros = [z.midpoint for z in isolate_real_roots(r.num)] if r.num.degree > 0 else []
        poles = [p.midpoint for p in isolate_real_roots(r.den)] if r.den.degree > 0 else []
        return [z for z in zeros if lo < z < hi], [p for p in poles if lo < p < hi]

    f = compile_expression(e)
    xs = np.linspace(lo, hi, points)[1:-1]
    values = f.vector(xs)
    poles = [float(x) for x in xs[~np.isfinite(values)]]
    zeros: List[float] = [float(x) for x, v in zip(xs, values) if v == 0.0]
    for i in range(len(xs) - 1):
        a, b = values[i], values[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0:
            zeros.append(float(brentq(f.scalar, xs[i], xs[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)))
    return sorted(zeros), sorted(poles)


def sign_summary(
    e: Expression,
    *,
    window: Optional[float] = None,
    points: Optional[int] = None,
) -> SignSummary:
    """
    Global sign of e on the real line (away from poles).

    Polynomials go through Sturm sequences; rational functions and single
    rational*exp(polynomial) terms reduce to the sign polynomial num*den, which is
    exact. Everything else falls back to the grid.
    """
    window = float(window if window is not None else settings.sign_window)
    points = int(points if points is not None else settings.grid_points)

    es = to_exp_sum(e)
    if es is not None:
        if es.is_zero:
            return SignSummary(tag=SignTag.IDENTICALLY_ZERO)
        term = es.single_term
        if term is not None:
            r, _ = term
            summary = sturm_sign_analysis(r.sign_polynomial())
            poles = tuple(isolate_real_roots(r.den)) if r.den.degree > 0 else ()
            if not poles:
                return summary
            roots = tuple(isolate_real_roots(r.num)) if r.num.degree > 0 else ()
            return SignSummary(
                tag=summary.tag,
                roots=roots,
                poles=poles,
                note="sign taken away from the poles",
            )
    logger.debug("grid sign analysis for %s on [-%g, %g]", e, window, window)
    return grid_sign_summary(e, window=window, points=points)
