from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

Window = Tuple[float, float, float, float]

CANVAS = 600
# curve_id prefix -> inline style
STYLES: Dict[str, str] = {
    "traj": "fill:none;stroke:#1f4e9c;stroke-width:1.2",
    "cycle": "fill:none;stroke:#b8241c;stroke-width:1.8",
    "level": "fill:none;stroke:#7a7a7a;stroke-width:0.8;stroke-dasharray:4 3",
    "iso": "fill:none;stroke:#2b8a3e;stroke-width:1.0",
    "finf": "fill:none;stroke:#c77d00;stroke-width:1.0;stroke-dasharray:6 3",
}
DEFAULT_STYLE = "fill:none;stroke:#000000;stroke-width:1.0"


def style_for(curve_id: str) -> str:
    for prefix, style in STYLES.items():
        if curve_id.startswith(prefix):
            return style
    return DEFAULT_STYLE


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def clip_runs(points: np.ndarray, window: Window) -> List[np.ndarray]:
    """Maximal runs of consecutive points inside the window; runs shorter than 2 points are dropped."""
    xmin, xmax, ymin, ymax = window
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    inside = (
        np.isfinite(pts).all(axis=1)
        & (pts[:, 0] >= xmin) & (pts[:, 0] <= xmax)
        & (pts[:, 1] >= ymin) & (pts[:, 1] <= ymax)
    )
    runs: List[np.ndarray] = []
    start: Optional[int] = None
    for i, ok in enumerate(inside):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append(pts[start:i])
            start = None
    if start is not None:
        runs.append(pts[start:])
    return [r for r in runs if len(r) >= 2]


def _polyline(points: np.ndarray, style: str, curve_id: str) -> str:
    # y is flipped by the outer group transform
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return f'<polyline data-curve="{curve_id}" points="{coords}" style="{style}" vector-effect="non-scaling-stroke"/>'


def render_svg(
    curves: Iterable[Tuple[str, np.ndarray]],
    window: Window,
    *,
    title: str = "",
) -> str:
    """
    Self-contained SVG whose viewBox is the window itself (data coordinates,
    y flipped). Axes are drawn through the origin when it is in view.
    """
    xmin, xmax, ymin, ymax = window
    w, h = xmax - xmin, ymax - ymin
    size_w = CANVAS
    size_h = max(1, int(round(CANVAS * h / w)))

    lines: List[str] = []
    lines.append('<?xml version="1.0" encoding="UTF-8"?>')
    lines.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size_w}" height="{size_h}" '
        f'viewBox="{_fmt(xmin)} {_fmt(-ymax)} {_fmt(w)} {_fmt(h)}">'
    )
    if title:
        lines.append(f"<title>{title}</title>")
    lines.append(
        f'<rect x="{_fmt(xmin)}" y="{_fmt(-ymax)}" width="{_fmt(w)}" height="{_fmt(h)}" style="fill:#ffffff;stroke:none"/>'
    )
    lines.append('<g transform="scale(1,-1)">')

    axis = "stroke:#bbbbbb;stroke-width:0.6"
    if xmin <= 0.0 <= xmax:
        lines.append(f'<line x1="0" y1="{_fmt(ymin)}" x2="0" y2="{_fmt(ymax)}" style="{axis}" vector-effect="non-scaling-stroke"/>')
    if ymin <= 0.0 <= ymax:
        lines.append(f'<line x1="{_fmt(xmin)}" y1="0" x2="{_fmt(xmax)}" y2="0" style="{axis}" vector-effect="non-scaling-stroke"/>')

    for curve_id, points in curves:
        style = style_for(curve_id)
        for run in clip_runs(points, window):
            lines.append(_polyline(run, style, curve_id))

    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def curves_from_frame(frame: pd.DataFrame) -> List[Tuple[str, np.ndarray]]:
    """(curve_id, points) per curve of a long curve_id,x,y table, in first-appearance order."""
    out: List[Tuple[str, np.ndarray]] = []
    if frame.empty:
        return out
    for cid in pd.unique(frame["curve_id"]):
        part = frame[frame["curve_id"] == cid]
        out.append((str(cid), part[["x", "y"]].to_numpy(dtype=float)))
    return out


def write_svg(path: Path, curves: Sequence[Tuple[str, np.ndarray]], window: Window, *, title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(curves, window, title=title), encoding="utf-8")
    return path
