from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree


def _as_polyline(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ValueError(f"expected an (N, 2) polyline with N >= 2, got shape {pts.shape}")
    return pts


def densify(points, max_gap: float) -> np.ndarray:
    """Insert points so that consecutive vertices are at most `max_gap` apart."""
    pts = _as_polyline(points)
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil(np.hypot(*(b - a)) / max_gap)))
        s = np.linspace(0.0, 1.0, k + 1)[1:, None]
        out.append(a + s * (b - a))
    return np.vstack(out)


def _directed(src: np.ndarray, dst: np.ndarray, tree: cKDTree, k: int) -> float:
    """max over src of the distance to the polyline dst (segments, not only vertices)."""
    k = min(k, len(dst))
    _, idx = tree.query(src, k=k)
    idx = np.atleast_2d(idx.reshape(len(src), -1))
    a_all = dst[:-1]
    d_all = dst[1:] - dst[:-1]
    len2 = np.einsum("ij,ij->i", d_all, d_all)
    best = np.full(len(src), np.inf)
    for col in range(idx.shape[1]):
        # each nearby vertex contributes its two adjacent segments
        for seg in (np.clip(idx[:, col] - 1, 0, len(a_all) - 1), np.clip(idx[:, col], 0, len(a_all) - 1)):
            a = a_all[seg]
            d = d_all[seg]
            l2 = len2[seg]
            with np.errstate(invalid="ignore", divide="ignore"):
                t = np.where(l2 > 0, np.einsum("ij,ij->i", src - a, d) / l2, 0.0)
            t = np.clip(t, 0.0, 1.0)
            proj = a + t[:, None] * d
            best = np.minimum(best, np.hypot(*(src - proj).T))
    return float(np.max(best))


def curve_distance(a, b, *, neighbours: int = 4) -> float:
    """Symmetric Hausdorff distance between two polylines, with point-to-segment projection."""
    pa = _as_polyline(a)
    pb = _as_polyline(b)
    return max(
        _directed(pa, pb, cKDTree(pb), neighbours),
        _directed(pb, pa, cKDTree(pa), neighbours),
    )


def winding_number(points, center=(0.0, 0.0)) -> int:
    """Turns of a closed polyline around `center` (clockwise negative)."""
    pts = _as_polyline(points) - np.asarray(center, dtype=float)
    theta = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
    closing = np.arctan2(pts[0, 1], pts[0, 0]) - np.arctan2(pts[-1, 1], pts[-1, 0])
    closing = (closing + np.pi) % (2 * np.pi) - np.pi
    return int(round((theta[-1] - theta[0] + closing) / (2 * np.pi)))
