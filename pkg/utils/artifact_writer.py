from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

FLOAT_FORMAT = "%.17g"


def sanitize_for_json(obj: Any) -> Any:
    """Recursively replace non-finite floats (JSON has no inf/nan) and unwrap numpy/pydantic values."""
    if isinstance(obj, BaseModel):
        return sanitize_for_json(obj.model_dump(mode="json"))
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [sanitize_for_json(x) for x in list(obj)]
    if isinstance(obj, dict):
        return {str(k): sanitize_for_json(v) for k, v in obj.items()}
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(sanitize_for_json(obj), ensure_ascii=False, indent=2)


def artifact_path(out_dir: Path, stem: str, suffix: str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in stem) or "artifact"
    return out_dir / f"{safe}.{suffix.lstrip('.')}"


def write_json(out_dir: Path, stem: str, obj: Any) -> Path:
    path = artifact_path(out_dir, stem, "json")
    path.write_text(dumps_json(obj) + "\n", encoding="utf-8")
    return path


def write_csv(
    out_dir: Path,
    stem: str,
    frame: pd.DataFrame,
    *,
    header: Optional[Mapping[str, Any]] = None,
) -> Path:
    """
    CSV with 17 significant digits, so floats round-trip bit-exactly. `header`
    becomes a single leading `# key=value ...` comment line.
    """
    path = artifact_path(out_dir, stem, "csv")
    with path.open("w", encoding="utf-8", newline="") as f:
        if header:
            f.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def trajectory_frame(ts: np.ndarray, states: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"t": np.asarray(ts, dtype=float), "x": states[:, 0], "y": states[:, 1]})


def curves_frame(curves: Mapping[str, np.ndarray]) -> pd.DataFrame:
    """Long table curve_id,x,y from named (n, 2) polylines, in insertion order."""
    parts = [
        pd.DataFrame({"curve_id": cid, "x": pts[:, 0], "y": pts[:, 1]})
        for cid, pts in curves.items()
        if len(pts)
    ]
    if not parts:
        return pd.DataFrame({"curve_id": pd.Series(dtype=str), "x": pd.Series(dtype=float), "y": pd.Series(dtype=float)})
    return pd.concat(parts, ignore_index=True)
