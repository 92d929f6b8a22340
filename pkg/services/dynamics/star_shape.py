from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from config import settings
from dto.dynamics_dto import CycleEstimate, IntegrationOptions, StarShapeResult
from services.dynamics.cycle_finder import cycle_orbit
from services.system.equation import EquationSpec

logger = logging.getLogger(__name__)

MIN_RADIUS = 1e-8


class DegenerateCycleError(ValueError):
    def __init__(self, radius: float):
        self.radius = radius
        super().__init__(f"curve passes within {radius:.3g} of the origin; polar angle undefined")


def star_shaped_polyline(points: np.ndarray) -> StarShapeResult:
    """
    A closed polyline is star-shaped with respect to the origin iff its polar
    angle moves strictly one way and sweeps at most one turn. The witness is
    the first pair of consecutive angles that breaks monotonicity.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError(f"expected an (N, 2) polyline with N >= 3, got shape {pts.shape}")
    radius = float(np.min(np.hypot(pts[:, 0], pts[:, 1])))
    if radius < MIN_RADIUS:
        raise DegenerateCycleError(radius)

    theta = np.arctan2(pts[:, 1], pts[:, 0])
    steps = np.diff(np.unwrap(theta))
    orientation = np.sign(np.sum(steps))
    if orientation == 0:
        return StarShapeResult(star_shaped=False, samples=len(pts), witness=[float(theta[0]), float(theta[1])])

    bad = np.nonzero(steps * orientation <= 0.0)[0]
    if bad.size:
        k = int(bad[0])
        logger.debug("polar angle turns back between samples %d and %d", k, k + 1)
        return StarShapeResult(
            star_shaped=False, samples=len(pts), witness=[float(theta[k]), float(theta[k + 1])]
        )

    sweep = float(abs(np.sum(steps)))
    if sweep > 2.0 * np.pi * (1.0 + 1e-9):
        return StarShapeResult(star_shaped=False, samples=len(pts), witness=[float(theta[0]), sweep])
    return StarShapeResult(star_shaped=True, samples=len(pts))


def star_shaped(
    spec: EquationSpec,
    cycle: CycleEstimate,
    samples: Optional[int] = None,
    opts: Optional[IntegrationOptions] = None,
) -> StarShapeResult:
    n = samples or settings.star_samples
    # one extra sample closes the loop; the duplicate endpoint is dropped
    orbit = cycle_orbit(spec, cycle, n + 1, opts)
    return star_shaped_polyline(orbit[:-1, 1:3])
