"""CSV, JSON and SVG writers.

All writers format numbers with a fixed precision and iterate in a fixed
order, so identical inputs give byte-identical files.  Files are written to
a temporary name in the target directory and renamed into place, so a
failed run never leaves a partial file behind.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .tracer import CurveTrace, EquidistantCloud, MarkerKind

MARKER_COLUMNS = ("u", "v", "kind", "tan1_u", "tan1_v", "tan2_u", "tan2_v", "delta")


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"  # folds -0.0
    return f"{x:.12g}"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def trace_csv(trace: CurveTrace, with_points: bool = True) -> str:
    """Polylines as ``u,v[,x1..x4]`` rows; a blank line separates polylines."""
    embed = with_points and trace.patch is not None
    cols = ["u", "v"] + (["x1", "x2", "x3", "x4"] if embed else [])
    lines = [",".join(cols)]
    for k, poly in enumerate(trace.polylines):
        if k:
            lines.append("")
        pts = trace.patch.evaluate(poly[:, 0], poly[:, 1]) if embed else None
        for i, (u, v) in enumerate(poly):
            row = [fmt(u), fmt(v)]
            if embed:
                row += [fmt(c) for c in pts[i]]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def markers_csv(trace: CurveTrace) -> str:
    lines = [",".join(MARKER_COLUMNS)]
    for m in trace.markers:
        tans = list(m.tangents) + [None] * (2 - len(m.tangents))
        row = [fmt(m.point[0]), fmt(m.point[1]), m.kind.value]
        for t in tans:
            row += ["nan", "nan"] if t is None else [fmt(t[0]), fmt(t[1])]
        row.append(fmt(m.delta))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _round(x, digits=12):
    if isinstance(x, dict):
        return {k: _round(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v, digits) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist(), digits)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{digits}g}") + 0.0
    if isinstance(x, np.integer):
        return int(x)
    return x


def cloud_json(cloud: EquidistantCloud) -> str:
    records = [{
        "x": r.x,
        "q_plus": r.q_plus,
        "q_minus": r.q_minus,
        "degree": r.degree,
        "label": r.label.to_dict(),
        "residual": r.residual,
    } for r in cloud.records]
    doc = {"lambda": cloud.lam, "grid": cloud.grid, "dropped": cloud.dropped,
           "count": len(records), "records": records}
    return json.dumps(_round(doc), indent=1, sort_keys=True) + "\n"


def to_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


# -- SVG ------------------------------------------------------------------------

_SIZE = 480
_PAD = 20


def trace_svg(trace: CurveTrace, title: str = "", dashed=()) -> str:
    """Polylines in the parameter box; circles, crosses and triangles for the markers.

    ``dashed`` holds extra polylines (e.g. parabolic lines) drawn dotted.
    """
    x0, x1, y0, y1 = trace.box
    span = _SIZE - 2 * _PAD

    def sx(u):
        return _PAD + (u - x0) / (x1 - x0) * span

    def sy(v):  # parameter v upwards
        return _SIZE - _PAD - (v - y0) / (y1 - y0) * span

    def c(z):
        return f"{z:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
           f'viewBox="0 0 {_SIZE} {_SIZE}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<rect x="{_PAD}" y="{_PAD}" width="{span}" height="{span}" '
               'fill="none" stroke="#999999" stroke-width="1"/>')
    for poly in dashed:
        pts = " ".join(f"{c(sx(u))},{c(sy(v))}" for u, v in poly)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#777777" stroke-width="1" '
                   'stroke-dasharray="2,3"/>')
    for poly in trace.polylines:
        pts = " ".join(f"{c(sx(u))},{c(sy(v))}" for u, v in poly)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9a" stroke-width="1.2"/>')
    r = 5.0
    for m in trace.markers:
        px, py = sx(m.point[0]), sy(m.point[1])
        if m.kind is MarkerKind.ISOLATED:
            out.append(f'<circle cx="{c(px)}" cy="{c(py)}" r="{r}" fill="#c0392b"/>')
        elif m.kind is MarkerKind.CROSSING:
            out.append(f'<path d="M{c(px - r)},{c(py - r)} L{c(px + r)},{c(py + r)} '
                       f'M{c(px - r)},{c(py + r)} L{c(px + r)},{c(py - r)}" '
                       'stroke="#c0392b" stroke-width="2"/>')
        else:
            out.append(f'<polygon points="{c(px)},{c(py - r)} {c(px - r)},{c(py + r)} '
                       f'{c(px + r)},{c(py + r)}" fill="#27ae60"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_trace(trace: CurveTrace, outdir, stem: str, formats=("csv", "svg"), dashed=()) -> list:
    """Write every requested file; nothing is written if formatting fails."""
    texts = {}
    if "csv" in formats:
        texts[f"{stem}.csv"] = trace_csv(trace)
        texts[f"{stem}_markers.csv"] = markers_csv(trace)
    if "svg" in formats:
        texts[f"{stem}.svg"] = trace_svg(trace, stem, dashed)
    if "json" in formats:
        texts[f"{stem}.json"] = to_json(trace_summary(trace))
    return [atomic_write(Path(outdir) / name, text) for name, text in texts.items()]


def trace_summary(trace: CurveTrace) -> dict:
    return {
        "field": trace.field_name,
        "base_point": trace.base_point,
        "point_class": None if trace.point_class is None else str(trace.point_class),
        "grid": list(trace.grid),
        "box": list(trace.box),
        "polylines": len(trace.polylines),
        "markers": [{"point": m.point, "kind": m.kind.value,
                     "tangents": [list(t) for t in m.tangents], "delta": m.delta,
                     "hessian_det": m.hessian_det, "check": m.check} for m in trace.markers],
    }
