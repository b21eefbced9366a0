"""CSV and SVG writers for trajectories."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .diagnostics import CSV_COLUMNS, FLAG_NAMES

WIDTH, HEIGHT = 800, 500
_MARGIN = dict(left=90, right=20, top=40, bottom=60)
_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return f"{float(value):.9g}"


def csv_text(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(_fmt(getattr(rec, col)) for col in CSV_COLUMNS)
    return buf.getvalue()


def write_csv(records, path) -> Path:
    """One header row, then one row per record; numbers to 9 significant digits, flags 0/1."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(records))
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of a file written by :func:`write_csv` (flags as bool arrays)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    for name in FLAG_NAMES:
        if name in cols:
            cols[name] = cols[name].astype(bool)
    return cols


# ---------------------------------------------------------------------------
# SVG

def _nice_range(lo: float, hi: float) -> tuple[float, float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return 0.0, 1.0
    if hi == lo:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def line_plot(series: dict[str, tuple], title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Minimal SVG line chart: linear axes with automatic range, one polyline per series.

    ``series`` maps a legend label to ``(x, y)`` arrays; non-finite points are dropped.
    """
    clean = {}
    for label, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        clean[label] = (x[keep], y[keep])
    xs = np.concatenate([v[0] for v in clean.values()] or [np.zeros(0)])
    ys = np.concatenate([v[1] for v in clean.values()] or [np.zeros(0)])
    x0, x1 = _nice_range(xs.min(), xs.max()) if xs.size else (0.0, 1.0)
    y0, y1 = _nice_range(ys.min(), ys.max()) if ys.size else (0.0, 1.0)
    L, R, T, B = _MARGIN["left"], WIDTH - _MARGIN["right"], _MARGIN["top"], HEIGHT - _MARGIN["bottom"]

    def px(x):
        return L + (x - x0) / (x1 - x0) * (R - L)

    def py(y):
        return B - (y - y0) / (y1 - y0) * (B - T)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>',
    ]
    for i in range(6):
        fx = x0 + (x1 - x0) * i / 5
        fy = y0 + (y1 - y0) * i / 5
        out.append(f'<line x1="{px(fx):.2f}" y1="{B}" x2="{px(fx):.2f}" y2="{B + 5}" stroke="black"/>')
        out.append(f'<text x="{px(fx):.2f}" y="{B + 20}" text-anchor="middle">{fx:.4g}</text>')
        out.append(f'<line x1="{L - 5}" y1="{py(fy):.2f}" x2="{L}" y2="{py(fy):.2f}" stroke="black"/>')
        out.append(f'<text x="{L - 8}" y="{py(fy) + 4:.2f}" text-anchor="end">{fy:.4g}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{(L + R) / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{(T + B) / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {(T + B) / 2})">{escape(ylabel)}</text>')
    for i, (label, (x, y)) in enumerate(clean.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = T + 16 + 16 * i
        out.append(f'<line x1="{R - 150}" y1="{ly - 4}" x2="{R - 130}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{R - 125}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trajectory_panels(traj) -> dict[str, str]:
    """The four standard panels: interface, input, temperature at ``s0``, estimation errors."""
    t = traj.t
    unit = "W/m^2" if traj.actuation == "neumann" else "K"
    panels = {
        "s": line_plot({"s(t)": (t, traj.s)}, "Interface position", "t [s]", "s [m]"),
        "input": line_plot({"input": (t, traj.input)}, "Control input", "t [s]", f"input [{unit}]"),
        "T_s0": line_plot({"T(s0, t)": (t, traj.T_s0)}, "Temperature at the initial interface",
                          "t [s]", "T [K]"),
    }
    if np.any(np.isfinite(traj.err_probe)):
        labels = ("x = 0", "x = s/4", "x = s/2")
        panels["err"] = line_plot({lab: (t, traj.err_probe[:, i]) for i, lab in enumerate(labels)},
                                  "Estimation error T - T_hat", "t [s]", "error [K]")
    return panels


def write_svgs(traj, directory, stem: str) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for key, svg in trajectory_panels(traj).items():
        path = directory / f"{stem}_{key}.svg"
        path.write_text(svg, encoding="utf-8")
        paths.append(path)
    return paths
