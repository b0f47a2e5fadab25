"""Static SVG picture of an annular braid diagram.

The angle about the axis is drawn as the polar angle and the height as the
radius, so every strand runs once or more around the annulus. Crossings
are marked green (positive) or red (negative).
"""

from __future__ import annotations

import logging
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from singlink.braid import BraidDiagram

logger = logging.getLogger(__name__)

SIZE = 400
INNER = 80
OUTER = 180
COLOURS = ("#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")


def _to_canvas(theta, height, epsilon):
    radius = INNER + (OUTER - INNER) * (np.asarray(height) / epsilon + 1) / 2
    return SIZE / 2 + radius * np.cos(theta), SIZE / 2 - radius * np.sin(theta)


def _path(x, y) -> str:
    return "M " + " L ".join(f"{a:.2f} {b:.2f}" for a, b in zip(x, y)) + " Z"


def diagram_svg(diagram: BraidDiagram, title: str = "") -> str:
    epsilon = diagram.loops[0].epsilon
    parts = [
        f'<circle cx="{SIZE / 2}" cy="{SIZE / 2}" r="{INNER}" stroke="#ddd" fill="none"/>',
        f'<circle cx="{SIZE / 2}" cy="{SIZE / 2}" r="{OUTER}" stroke="#ddd" fill="none"/>',
    ]
    for c, loop in enumerate(diagram.loops):
        x, a = diagram.axis.project(loop.points)
        theta = np.arctan2(x[:, 1], x[:, 0])
        px, py = _to_canvas(theta, a[:, 1], epsilon)
        colour = COLOURS[c % len(COLOURS)]
        parts.append(
            f'<path d="{_path(px, py)}" stroke="{colour}" fill="none" stroke-width="1.5">'
            f"<title>{escape(loop.disk_label)}</title></path>"
        )
    for crossing in diagram.crossings:
        theta, height = crossing.position
        cx, cy = _to_canvas(theta, height, epsilon)
        fill = "#2ca02c" if crossing.sign > 0 else "#d62728"
        parts.append(
            f'<circle cx="{float(cx):.2f}" cy="{float(cy):.2f}" r="3" fill="{fill}">'
            f"<title>{crossing.sign:+d}</title></circle>"
        )
    if title:
        parts.append(f'<text x="8" y="16" font-family="monospace" font-size="12">{escape(title)}</text>')
    body = "\n".join(parts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}px">\n'
        f"{body}\n</svg>\n"
    )


def write_svg(diagram: BraidDiagram, path: str | Path, title: str = "") -> None:
    Path(path).write_text(diagram_svg(diagram, title), encoding="utf-8")
    logger.info(f"diagram written to {path}")
