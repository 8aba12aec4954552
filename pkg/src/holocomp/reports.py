"""Deterministic report serialization: canonical JSON, CSV, SVG heatmaps.

Byte-identical output for identical inputs is a contract here: JSON is
emitted with sorted keys and fixed separators, floats go through repr,
nothing carries a timestamp, and files land atomically via a temp file
in the target directory followed by a rename.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import UnsupportedReportError

__all__ = [
    "sanitize",
    "canonical_json_bytes",
    "write_atomic",
    "write_json_report",
    "csv_bytes",
    "write_csv",
    "emit_heatmap",
]


def sanitize(obj):
    """Recursively convert to plain JSON-ready types; non-finite -> None."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        if not (np.isfinite(c.real) and np.isfinite(c.imag)):
            return None
        return [c.real, c.imag]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def canonical_json_bytes(obj):
    text = json.dumps(
        sanitize(obj), sort_keys=True, separators=(",", ":"), allow_nan=False
    )
    return text.encode("utf-8") + b"\n"


def write_atomic(path, data):
    """Write bytes through a same-directory temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json_report(path, obj):
    return write_atomic(path, canonical_json_bytes(obj))


def _cell_text(x):
    if x is None:
        return ""
    if isinstance(x, str):
        if "," in x or "\n" in x or '"' in x:
            raise ValueError(f"CSV cell needs quoting, refusing: {x!r}")
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    raise TypeError(f"cannot format CSV cell of type {type(x).__name__}")


def csv_bytes(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell_text(x) for x in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_csv(path, header, rows):
    return write_atomic(path, csv_bytes(header, rows))


# ---------------------------------------------------------------------------
# SVG heatmap

_STOPS = (
    (0.0, (0x44, 0x01, 0x54)),
    (0.25, (0x3B, 0x52, 0x8B)),
    (0.5, (0x21, 0x91, 0x8C)),
    (0.75, (0x5E, 0xC9, 0x62)),
    (1.0, (0xFD, 0xE7, 0x25)),
)


def _color(x):
    x = min(max(x, 0.0), 1.0)
    for (x0, c0), (x1, c1) in zip(_STOPS, _STOPS[1:]):
        if x <= x1:
            f = 0.0 if x1 == x0 else (x - x0) / (x1 - x0)
            return "#%02x%02x%02x" % tuple(
                int(round(c0[k] + f * (c1[k] - c0[k]))) for k in range(3)
            )
    return "#%02x%02x%02x" % _STOPS[-1][1]


def _fmt_num(x):
    return repr(float(x))


def emit_heatmap(report, path):
    """Render the 2-D grid carried by a report dict as a standalone SVG.

    Expects keys: "grid" (rows of numbers, None allowed), optional
    "flags" (same shape, nonzero = flagged), "x_label", "y_label",
    "title", "row_labels", "col_labels".  Flagged or missing cells are
    gray with a cross; the unflagged maximum gets a circle marker.
    """
    if not isinstance(report, dict) or "grid" not in report:
        raise UnsupportedReportError("report carries no 2-D grid to render")
    grid = report["grid"]
    nrows = len(grid)
    ncols = len(grid[0]) if nrows else 0
    if nrows == 0 or ncols == 0:
        raise UnsupportedReportError("grid is empty, nothing to render")
    if any(len(row) != ncols for row in grid):
        raise UnsupportedReportError("grid rows are ragged")
    flags = report.get("flags")

    vals = np.full((nrows, ncols), np.nan)
    for i, row in enumerate(grid):
        for j, v in enumerate(row):
            if v is not None and np.isfinite(v):
                vals[i, j] = float(v)
    flagged = np.zeros((nrows, ncols), dtype=bool)
    if flags is not None:
        for i, row in enumerate(flags):
            for j, v in enumerate(row):
                flagged[i, j] = bool(v)
    flagged |= ~np.isfinite(vals)

    usable = vals[~flagged]
    vmin = float(np.min(usable)) if usable.size else 0.0
    vmax = float(np.max(usable)) if usable.size else 1.0
    span = vmax - vmin

    cw = max(4, min(28, 640 // ncols))
    ch = max(4, min(28, 480 // nrows))
    left, top, right, bottom = 70, 40, 20, 56
    width = left + ncols * cw + right
    height = top + nrows * ch + bottom

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    title = report.get("title", "")
    if title:
        parts.append(
            f'<text x="{width // 2}" y="24" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{title}</text>'
        )
    argmax = None
    if usable.size:
        masked = np.where(flagged, -np.inf, vals)
        argmax = np.unravel_index(int(np.argmax(masked)), vals.shape)
    for i in range(nrows):
        for j in range(ncols):
            x = left + j * cw
            y = top + i * ch
            if flagged[i, j]:
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" '
                    f'fill="#999999"/>'
                )
                parts.append(
                    f'<line x1="{x}" y1="{y}" x2="{x + cw}" y2="{y + ch}" '
                    f'stroke="#333333" stroke-width="1"/>'
                )
            else:
                frac = 0.5 if span == 0.0 else (vals[i, j] - vmin) / span
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" '
                    f'fill="{_color(frac)}"/>'
                )
    if argmax is not None:
        ax = left + argmax[1] * cw + cw // 2
        ay = top + argmax[0] * ch + ch // 2
        r = max(3, min(cw, ch) // 2 - 1)
        parts.append(
            f'<circle cx="{ax}" cy="{ay}" r="{r}" fill="none" '
            f'stroke="#ff0000" stroke-width="2"/>'
        )
    x_label = report.get("x_label", "")
    y_label = report.get("y_label", "")
    if x_label:
        parts.append(
            f'<text x="{left + (ncols * cw) // 2}" y="{height - 30}" '
            f'text-anchor="middle" font-family="monospace" font-size="12">'
            f"{x_label}</text>"
        )
    if y_label:
        cy = top + (nrows * ch) // 2
        parts.append(
            f'<text x="18" y="{cy}" text-anchor="middle" '
            f'font-family="monospace" font-size="12" '
            f'transform="rotate(-90 18 {cy})">{y_label}</text>'
        )
    parts.append(
        f'<text x="{left}" y="{height - 10}" font-family="monospace" '
        f'font-size="11">min={_fmt_num(vmin)} max={_fmt_num(vmax)}'
        f"</text>"
    )
    row_labels = report.get("row_labels")
    if row_labels:
        for i, lab in enumerate(row_labels):
            if nrows > 16 and i % max(1, nrows // 8) != 0:
                continue
            parts.append(
                f'<text x="{left - 4}" y="{top + i * ch + ch // 2 + 4}" '
                f'text-anchor="end" font-family="monospace" font-size="9">'
                f"{lab}</text>"
            )
    col_labels = report.get("col_labels")
    if col_labels:
        for j, lab in enumerate(col_labels):
            if ncols > 16 and j % max(1, ncols // 8) != 0:
                continue
            parts.append(
                f'<text x="{left + j * cw + cw // 2}" '
                f'y="{top + nrows * ch + 12}" text-anchor="middle" '
                f'font-family="monospace" font-size="9">{lab}</text>'
            )
    parts.append("</svg>")
    return write_atomic(path, ("\n".join(parts) + "\n").encode("utf-8"))
