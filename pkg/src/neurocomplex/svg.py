"""Static SVG rendering of a trained map: one shaded cell per neuron."""

from __future__ import annotations

import numpy as np

from .som import MapLattice, u_matrix


def _grey(v):
    g = int(round(255 * (1.0 - v)))
    return f"#{g:02x}{g:02x}{g:02x}"


def shade_values(values) -> np.ndarray:
    """Min-max scale to [0, 1]; constant input (including one neuron) maps to 0.5."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.full(len(v), 0.5)
    return (v - lo) / (hi - lo)


def export_map_svg(lattice: MapLattice, values, title: str = "", cell: int = 40,
                   labels=None) -> str:
    """SVG document with neuron ``c`` drawn at its lattice position, darker = larger value."""
    shade = shade_values(values)
    rows, cols = (lattice.rows, lattice.cols) if lattice.shape == "grid" else (1, lattice.rows)
    top = 20 if title else 0
    w, h = cols * cell, rows * cell + top
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
    ]
    if title:
        out.append(f'<text x="2" y="14" font-size="12" font-family="sans-serif">{_escape(title)}</text>')
    for c in range(lattice.n_neurons):
        r, k = divmod(c, cols)
        x, y = k * cell, top + r * cell
        out.append(
            f'<rect class="neuron" data-neuron="{c}" x="{x}" y="{y}" width="{cell}" height="{cell}" '
            f'fill="{_grey(shade[c])}" stroke="#444444" stroke-width="1"/>'
        )
        if labels is not None:
            colour = "#ffffff" if shade[c] > 0.5 else "#000000"
            out.append(
                f'<text x="{x + cell / 2:g}" y="{y + cell / 2 + 4:g}" font-size="10" text-anchor="middle" '
                f'font-family="sans-serif" fill="{colour}">{_escape(str(labels[c]))}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def u_matrix_svg(prototypes, lattice: MapLattice, title="U-matrix") -> str:
    return export_map_svg(lattice, u_matrix(prototypes, lattice), title)


def counts_svg(assignments, lattice: MapLattice, title="hits") -> str:
    counts = np.bincount(np.asarray(assignments), minlength=lattice.n_neurons)
    return export_map_svg(lattice, counts, title, labels=counts.tolist())


def _escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
