"""CSV and standalone SVG output for convergence maps."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .sweep import ConvergenceMap, TransformedCell

MAP_COLUMNS = ["s_hf", "s_lf", "converged", "iterations", "T", "distance", "status"]


def _num(x: float) -> str:
    return repr(float(x))


def write_map_csv(cmap: ConvergenceMap, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MAP_COLUMNS)
        for c in cmap.cells:
            writer.writerow([_num(c.s_hf), _num(c.s_lf), int(c.converged), c.iterations,
                             _num(c.T), _num(c.distance), c.status])
    return path


def write_transform_csv(rows: Sequence[TransformedCell], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s_hf", "s_lf", "distance_error", "angular_error", "converged",
                         "quadrant_hf", "quadrant_lf"])
        for r in rows:
            writer.writerow([_num(r.s_hf), _num(r.s_lf), _num(r.distance_error),
                             _num(r.angular_error), int(r.converged), *r.quadrant])
    return path


def default_levels(cmap: ConvergenceMap, count: int = 4) -> list[float]:
    top = max(c.combined_norm for c in cmap.cells)
    return [top * (i + 1) / (count + 1) for i in range(count)] if top > 0 else []


def _edges(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size == 1:
        return np.array([values[0] - 0.5, values[0] + 0.5])
    mids = 0.5 * (values[1:] + values[:-1])
    return np.concatenate([[2 * values[0] - mids[0]], mids, [2 * values[-1] - mids[-1]]])


def map_svg(cmap: ConvergenceMap, levels: Optional[Sequence[float]] = None,
            size: int = 480, margin: int = 60) -> str:
    """Converged cells white, failed cells dark, dashed lines of constant combined norm."""
    levels = default_levels(cmap) if levels is None else list(levels)
    hx, ly = _edges(cmap.hf_values), _edges(cmap.lf_values)
    x0, x1, y0, y1 = hx[0], hx[-1], ly[0], ly[-1]

    def px(x):
        return margin + (x - x0) / (x1 - x0) * size

    def py(y):
        return margin + (y1 - y) / (y1 - y0) * size

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * margin}" '
        f'height="{size + 2 * margin}" viewBox="0 0 {size + 2 * margin} {size + 2 * margin}">',
        f'<defs><clipPath id="plot"><rect x="{margin}" y="{margin}" width="{size}" height="{size}"/>'
        f'</clipPath></defs>',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g clip-path="url(#plot)" shape-rendering="crispEdges">',
    ]
    ih = {v: i for i, v in enumerate(cmap.hf_values.tolist())}
    il = {v: i for i, v in enumerate(cmap.lf_values.tolist())}
    for c in cmap.cells:
        i, j = ih[c.s_hf], il[c.s_lf]
        fill = "#ffffff" if c.converged else "#333333"
        parts.append(f'<rect x="{px(hx[i]):.3f}" y="{py(ly[j + 1]):.3f}" '
                     f'width="{px(hx[i + 1]) - px(hx[i]):.3f}" height="{py(ly[j]) - py(ly[j + 1]):.3f}" '
                     f'fill="{fill}"/>')
    parts.append('</g><g clip-path="url(#plot)" fill="none" stroke="#1f77b4" stroke-width="1.2" '
                 'stroke-dasharray="6,4">')
    for lev in levels:
        pts = [(lev, 0.0), (0.0, lev), (-lev, 0.0), (0.0, -lev)]
        path = " ".join(f"{px(x):.3f},{py(y):.3f}" for x, y in pts)
        parts.append(f'<polygon class="iso" data-level="{_num(lev)}" points="{path}"/>')
    parts.append("</g>")
    parts.append(f'<rect x="{margin}" y="{margin}" width="{size}" height="{size}" fill="none" stroke="black"/>')
    for x in (x0, 0.5 * (x0 + x1), x1):
        parts.append(f'<text x="{px(x):.3f}" y="{margin + size + 18}" font-size="12" '
                     f'text-anchor="middle">{x:.3g}</text>')
    for y in (y0, 0.5 * (y0 + y1), y1):
        parts.append(f'<text x="{margin - 6}" y="{py(y) + 4:.3f}" font-size="12" '
                     f'text-anchor="end">{y:.3g}</text>')
    parts.append(f'<text x="{margin + size / 2}" y="{margin + size + 40}" font-size="13" '
                 f'text-anchor="middle">high-frequency deviation norm</text>')
    parts.append(f'<text x="16" y="{margin + size / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 16 {margin + size / 2})">low-frequency deviation norm</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_map(cmap: ConvergenceMap, out_dir, stem: str = "sweep",
               levels: Optional[Sequence[float]] = None) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_map_csv(cmap, out_dir / f"{stem}.csv")
    svg_path = out_dir / f"{stem}.svg"
    svg_path.write_text(map_svg(cmap, levels))
    return csv_path, svg_path
