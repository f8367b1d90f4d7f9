"""Delimited data files and gnuplot scripts for spectra and curve sets."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .solver import CurveSet, SpectralPoint

SPECTRUM_COLUMNS = ["lambda", "mu", "x", "E", "kind", "degeneracy", "residual", "oracle_delta"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _jsonable(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    return float(v)


def spectrum_rows(points: list[SpectralPoint]) -> list[dict]:
    return [
        {
            "lambda": p.pt.lam,
            "mu": p.pt.mu,
            "x": p.pt.x,
            "E": p.energy,
            "kind": p.kind.kind.value,
            "degeneracy": p.kind.degeneracy,
            "residual": p.condition_residual,
            "oracle_delta": p.oracle_delta,
        }
        for p in points
    ]


def write_rows(rows: list[dict], columns: list[str], fmt_name: str = "csv") -> str:
    """Serialize rows with fixed column order and 17-significant-digit floats."""
    if fmt_name == "json":
        out = [{c: _jsonable(r[c]) for c in columns} for r in rows]
        return json.dumps(out, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([r[c] if isinstance(r[c], str) else fmt(r[c]) for c in columns])
    return buf.getvalue()


def write_curves(cs: CurveSet, outdir: Path, prefix: str) -> list[Path]:
    """One whitespace-delimited polyline file per curve."""
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    cols = "lambda mu" if cs.plane == "lambda-mu" else "lambda E"
    for i, (c, label) in enumerate(zip(cs.curves, cs.labels)):
        p = outdir / f"{prefix}_{i:03d}.dat"
        lines = [f"# {label}", f"# {cols}"]
        lines += [f"{fmt(a)} {fmt(b)}" for a, b in c]
        p.write_text("\n".join(lines) + "\n")
        paths.append(p)
    return paths


def write_points(pts: np.ndarray, path: Path, header: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {header}"] + [f"{fmt(a)} {fmt(b)}" for a, b in pts]
    path.write_text("\n".join(lines) + "\n")
    return path


def gnuplot_script(
    groups: list[tuple[list[Path], str, str]],
    xlabel: str,
    ylabel: str,
    title: str,
    output: str,
    ranges: tuple[tuple[float, float], tuple[float, float]] | None = None,
) -> str:
    """Script plotting each ``(files, style, title)`` group; style is 'solid', 'dashed', 'dotted' or 'points'."""
    dt = {"solid": 1, "dashed": 2, "dotted": 3}
    lines = [
        "set terminal pngcairo size 900,700",
        f"set output '{output}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        f"set title '{title}'",
        "unset key",
    ]
    if ranges:
        (x0, x1), (y0, y1) = ranges
        lines += [f"set xrange [{fmt(x0)}:{fmt(x1)}]", f"set yrange [{fmt(y0)}:{fmt(y1)}]"]
    parts = []
    for files, style, _ in groups:
        for f in files:
            if style == "points":
                parts.append(f"'{f.name}' using 1:2 with points pt 7 ps 1 lc rgb 'gray40'")
            else:
                parts.append(f"'{f.name}' using 1:2 with lines dt {dt[style]} lc rgb 'black'")
    if parts:
        lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"
