"""Trajectory and diagnostics CSV files, SVG line plots and run metadata.

Numbers are written with 17 significant digits, which is enough for every
binary64 value to read back to the identical bit pattern.
"""
import csv
import json
from pathlib import Path

import numpy as np

__all__ = [
    "FLOAT_FMT",
    "trajectory_header",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_diagnostics_csv",
    "read_diagnostics_csv",
    "read_nodal_csv",
    "write_component_svgs",
    "line_plot_svg",
    "write_metadata",
]

FLOAT_FMT = "%.17g"


def trajectory_header(n_nodes):
    cols = ["t"]
    for i in range(n_nodes):
        cols += [f"m1_{i}", f"m2_{i}", f"m3_{i}"]
    return cols


def write_trajectory_csv(path, times, states):
    """One row per sample: ``t, m1_0, m2_0, m3_0, m1_1, ...``."""
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    n_s, n_nodes, _ = states.shape
    if times.shape != (n_s,):
        raise ValueError("times and states disagree on the sample count")
    table = np.column_stack([times, states.reshape(n_s, 3 * n_nodes)])
    np.savetxt(path, table, fmt=FLOAT_FMT, delimiter=",",
               header=",".join(trajectory_header(n_nodes)), comments="")


def read_trajectory_csv(path):
    """Inverse of :func:`write_trajectory_csv`: ``(times, states)``."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    if not header or header[0] != "t" or (len(header) - 1) % 3:
        raise ValueError(f"{path}: not a trajectory CSV (header {header[:4]}...)")
    n_nodes = (len(header) - 1) // 3
    if header != trajectory_header(n_nodes):
        raise ValueError(f"{path}: unexpected column names")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].copy(), data[:, 1:].reshape(len(data), n_nodes, 3)


def write_diagnostics_csv(path, series):
    np.savetxt(path, series.as_array(), fmt=FLOAT_FMT, delimiter=",",
               header=",".join(series.COLUMNS), comments="")


def read_diagnostics_csv(path):
    """Column dict keyed by name, ``t`` first."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, j].copy() for j, name in enumerate(header)}


def read_nodal_csv(path):
    """Nodal field file: one ``m1, m2, m3`` row per node, optional header row."""
    rows = []
    header_seen = False
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            try:
                vals = [float(c) for c in cells]
            except ValueError:
                if not rows and not header_seen:
                    header_seen = True
                    continue
                raise ValueError(f"{path}, line {lineno}: non-numeric entry") from None
            if len(vals) != 3:
                raise ValueError(f"{path}, line {lineno}: expected 3 columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no nodal rows")
    return np.array(rows)


def write_metadata(path, metadata):
    with open(path, "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# Plain SVG output, enough for a labelled line family.

_W, _H = 640, 420
_MARGIN = dict(left=70, right=150, top=40, bottom=55)


def _nice_ticks(lo, hi, n=5):
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = np.floor(lo / step) * step
    ticks = np.arange(start, hi + 0.5 * step, step)
    return ticks[(ticks >= lo - 1e-9 * step) & (ticks <= hi + 1e-9 * step)], step


def _color(j, n):
    # blue for early times, red for late
    s = j / max(n - 1, 1)
    r, g, b = int(30 + 200 * s), int(80 + 40 * (1 - abs(2 * s - 1))), int(230 - 200 * s)
    return f"rgb({r},{g},{b})"


def line_plot_svg(x, curves, labels, title, xlabel, ylabel, ylim=None):
    """SVG document text for a family of curves ``y_j(x)`` sharing ``x``."""
    x = np.asarray(x, dtype=float)
    curves = [np.asarray(c, dtype=float) for c in curves]
    x0, x1 = float(x.min()), float(x.max())
    if ylim is None:
        ys = np.concatenate(curves) if curves else np.array([0.0])
        ylim = (float(ys.min()), float(ys.max()))
    yticks, ystep = _nice_ticks(*ylim)
    y0, y1 = min(ylim[0], yticks[0]), max(ylim[1], yticks[-1])
    xticks, _ = _nice_ticks(x0, x1)
    left, right, top, bottom = (_MARGIN[k] for k in ("left", "right", "top", "bottom"))
    pw, ph = _W - left - right, _H - top - bottom

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{left + pw / 2}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xticks:
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in yticks:
        out.append(f'<line x1="{left - 5}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{py(t):.2f}" x2="{left + pw}" y2="{py(t):.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{round(t / ystep) * ystep:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{_H - 12}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2})">{_esc(ylabel)}</text>')
    for j, (y, lab) in enumerate(zip(curves, labels)):
        col = _color(j, len(curves))
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        ly = top + 14 + 16 * j
        out.append(f'<line x1="{left + pw + 12}" y1="{ly - 4}" x2="{left + pw + 32}" y2="{ly - 4}" '
                   f'stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly}">{_esc(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_component_svgs(directory, x, times, states, n_curves=9, title=""):
    """Write ``m1.svg``, ``m2.svg`` and ``m3.svg``: each component against
    ``x`` for ``n_curves`` snapshots spread evenly over the run."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    times = np.asarray(times)
    targets = np.linspace(times[0], times[-1], min(n_curves, len(times)))
    idx = sorted({int(np.argmin(np.abs(times - t))) for t in targets})
    paths = []
    for c in range(3):
        curves = [states[j, :, c] for j in idx]
        labels = [f"t = {times[j]:.3g}" for j in idx]
        svg = line_plot_svg(x, curves, labels, f"{title} m{c + 1}(x, t)".strip(), "x", f"m{c + 1}",
                            ylim=(-1.0, 1.0))
        path = directory / f"m{c + 1}.svg"
        path.write_text(svg)
        paths.append(path)
    return paths
