"""Deterministic JSON and CSV output."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SIG_DIGITS = 6


def _round(x: float, digits: int) -> float | None:
    if not math.isfinite(x):
        return None
    return float(f"{x:.{digits}g}")


def jsonable(obj, digits: int | None = SIG_DIGITS):
    """Recursively convert to JSON-ready values, rounding floats.

    ``digits=None`` keeps full precision. Non-finite floats become ``None``.
    """
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict(), digits)
    if isinstance(obj, dict):
        return {str(k): jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v, digits) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if digits is None:
            return x if math.isfinite(x) else None
        return _round(x, digits)
    return obj


def dumps(obj, digits: int | None = SIG_DIGITS) -> str:
    return json.dumps(jsonable(obj, digits), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_json(path: str | Path, obj, digits: int | None = SIG_DIGITS) -> Path:
    path = Path(path)
    path.write_text(dumps(obj, digits), encoding="utf-8")
    return path


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write rows with full float precision (``repr``)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path
