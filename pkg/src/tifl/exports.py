"""Deterministic file formats: CSV field tables, JSON, PGM heatmaps.

Every writer here must produce byte-identical output for identical
inputs, across runs and platforms: floats are formatted with explicit
printf-style specifiers (no locale, no dict-order surprises), rows are
emitted in row-major y-then-x order, and JSON uses 17 significant
digits so values round-trip exactly.
"""

import json
import math

import numpy as np

from .envelope import EnvelopeMap
from .fields import PlaneGrid

__all__ = [
    "format_float",
    "dumps_json",
    "plane_csv",
    "field_table_csv",
    "envelope_csv",
    "envelope_pgm",
    "plane_json_payload",
]


def format_float(value: float) -> str:
    """17-significant-digit decimal form; round-trips any finite double."""
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite float {value!r}")
    return f"{value:.17g}"


def _encode(obj, out: list) -> None:
    if obj is None or obj is True or obj is False:
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if k:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _encode(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for k, value in enumerate(obj):
            if k:
                out.append(",")
            _encode(value, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} deterministically")


def dumps_json(obj) -> str:
    """Deterministic compact JSON with 17-digit floats (insertion order)."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


def _row_points(grid: PlaneGrid):
    """Yield (iv, ix, x, y, z) in row-major v-then-x order."""
    for iv, v in enumerate(grid.axis_v):
        for ix, x in enumerate(grid.axis_x):
            if grid.plane == "xy":
                yield iv, ix, float(x), float(v), grid.offset
            else:
                yield iv, ix, float(x), grid.offset, float(v)


def plane_csv(grid: PlaneGrid, which: str = "e1") -> str:
    """CSV of one pair's potential and field on a plane, header
    (x,y,z,V,Ex,Ey,Ez); masked nodes are skipped; rows run in row-major
    v-then-x order."""
    field = grid.e1 if which == "e1" else grid.e2
    pot = grid.v1 if which == "e1" else grid.v2
    lines = ["x,y,z,V,Ex,Ey,Ez"]
    for iv, ix, x, y, z in _row_points(grid):
        if not grid.mask[iv, ix]:
            continue
        e = field[iv, ix]
        lines.append(
            ",".join(
                [format_float(x), format_float(y), format_float(z),
                 format_float(float(pot[iv, ix]))]
                + [format_float(float(c)) for c in e]
            )
        )
    return "\n".join(lines) + "\n"


def field_table_csv(points: np.ndarray, potentials: np.ndarray, fields: np.ndarray) -> str:
    """CSV with header (x,y,z,V,Ex,Ey,Ez), one row per point in input order."""
    lines = ["x,y,z,V,Ex,Ey,Ez"]
    for p, v, e in zip(points, potentials, fields):
        lines.append(",".join(format_float(float(c)) for c in (*p, v, *e)))
    return "\n".join(lines) + "\n"


def plane_json_payload(grid: PlaneGrid) -> dict:
    """Binary-free JSON form of a sampled plane (masked nodes are null)."""

    def cell(iv, ix, arr):
        if not grid.mask[iv, ix]:
            return None
        return [float(c) for c in arr[iv, ix]]

    def scalar(iv, ix, arr):
        return float(arr[iv, ix]) if grid.mask[iv, ix] else None

    n = grid.resolution
    return {
        "plane": grid.plane,
        "offset": grid.offset,
        "resolution": n,
        "axis_x": [float(v) for v in grid.axis_x],
        "axis_v": [float(v) for v in grid.axis_v],
        "v1": [[scalar(iv, ix, grid.v1) for ix in range(n)] for iv in range(n)],
        "v2": [[scalar(iv, ix, grid.v2) for ix in range(n)] for iv in range(n)],
        "e1": [[cell(iv, ix, grid.e1) for ix in range(n)] for iv in range(n)],
        "e2": [[cell(iv, ix, grid.e2) for ix in range(n)] for iv in range(n)],
    }


def envelope_csv(emap: EnvelopeMap) -> str:
    """CSV of the maximal envelope: header x,y,z,am_max, masked nodes skipped."""
    grid = emap.grid
    lines = ["x,y,z,am_max"]
    for iv, ix, x, y, z in _row_points(grid):
        if not grid.mask[iv, ix]:
            continue
        lines.append(
            ",".join(
                [format_float(x), format_float(y), format_float(z),
                 format_float(float(emap.values[iv, ix]))]
            )
        )
    return "\n".join(lines) + "\n"


def envelope_pgm(emap: EnvelopeMap) -> bytes:
    """8-bit binary PGM heatmap, linear scale normalized to the map peak.

    Rows are written top to bottom with the second plane coordinate
    decreasing, so the image is oriented the way the plane is usually
    drawn (up is +y or +z).  Masked nodes are black.
    """
    n = emap.resolution
    peak = emap.peak()
    values = np.where(emap.mask, emap.values, 0.0)
    if peak > 0:
        img = np.rint(values / peak * 255.0).astype(np.uint8)
    else:
        img = np.zeros((n, n), dtype=np.uint8)
    img = img[::-1, :]  # axis_v ascending -> image rows top-down
    header = f"P5\n{n} {n}\n255\n".encode("ascii")
    return header + img.tobytes()
