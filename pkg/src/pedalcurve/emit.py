"""CSV, JSON and SVG output for paths, trajectories and reports."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

import numpy as np

from .errors import EmptyPath
from .mechanics import RegionReport, Trajectory
from .paths import PolarPath

SCHEMA = "pedalcurve/1"


def fmt(x) -> str:
    """Round-trippable float formatting (17 significant digits)."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return format(x, ".17g")


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if obj is None or isinstance(obj, str):
        return obj
    try:
        v = float(obj)
    except (TypeError, ValueError):
        return str(obj)
    return None if math.isinf(v) or math.isnan(v) else float(fmt(v))


def to_json(kind: str, payload: dict) -> bytes:
    doc = {"schema": SCHEMA, "kind": kind}
    doc.update(_jsonable(payload))
    return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode("utf-8")


def _check(obj):
    n = len(obj.t) if isinstance(obj, Trajectory) else len(obj)
    if n == 0:
        raise EmptyPath("nothing to emit")


def emit(obj, fmt_name: str = "csv") -> bytes:
    """Serialize a PolarPath, Trajectory or RegionReport."""
    if isinstance(obj, RegionReport):
        if fmt_name != "json":
            raise ValueError("region reports are emitted as JSON")
        return to_json("region", obj.to_dict())
    if isinstance(obj, Trajectory):
        obj = trajectory_path(obj)
    if not isinstance(obj, PolarPath):
        raise TypeError(f"cannot emit {type(obj).__name__}")
    _check(obj)
    if fmt_name == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "phi", "x", "y"])
        for r, phi, x, y in zip(obj.r, obj.phi, obj.x, obj.y):
            w.writerow([fmt(r), fmt(phi), fmt(x), fmt(y)])
        return buf.getvalue().encode("utf-8")
    if fmt_name == "json":
        d = obj.to_dict()
        d["x"] = obj.x.tolist()
        d["y"] = obj.y.tolist()
        return to_json("polar_path", d)
    if fmt_name == "svg":
        return svg(obj)
    raise ValueError(f"unknown format {fmt_name!r}")


def trajectory_path(tr: Trajectory) -> PolarPath:
    r = tr.r
    if r.size == 0:
        raise EmptyPath("empty trajectory")
    return PolarPath(r, np.unwrap(tr.phi), [], False, tr.p)


def svg(path: PolarPath, size: int = 512, margin: float = 0.05) -> bytes:
    """Schematic SVG: one polyline per branch, pedal point marked at the origin."""
    _check(path)
    xy = path.xy()
    pts = np.vstack([xy, [[0.0, 0.0]]])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    pad = margin * span
    x0, y0 = lo[0] - pad, -(hi[1] + pad)
    w = h = span + 2 * pad
    stroke = span / 400
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{x0:.9g} {y0:.9g} {w:.9g} {h:.9g}">',
    ]
    for sl in path.branches():
        seg = xy[sl]
        coords = " ".join(f"{x:.9g},{-y:.9g}" for x, y in seg)
        tag = "polygon" if path.closed and len(path.branches()) == 1 else "polyline"
        lines.append(f'  <{tag} points="{coords}" fill="none" stroke="black" stroke-width="{stroke:.6g}"/>')
    lines.append(f'  <circle cx="0" cy="0" r="{3 * stroke:.6g}" fill="red"/>')
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")
