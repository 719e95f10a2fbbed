"""SVG picture of a reading-order result.

Line boxes are drawn as thin outlines, paragraph boxes are filled yellow when
read column-wise and pink when read row-wise, and a dark-blue polyline joins
paragraph centers in reading order.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .document import ROW, Document
from .geometry import RotatedBox, containing_box, corners
from .io import ConsistencyError
from .ordering import ReadingOrderResult

COL_FILL = "#fff176"
ROW_FILL = "#f8bbd0"
ORDER_STROKE = "#0d1b6e"
LINE_STROKE = "#555555"
MARGIN = 20.0
EMPTY_SIZE = 100.0


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _points(pts) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)


def paragraph_boxes(doc: Document, result: ReadingOrderResult) -> dict[int, RotatedBox]:
    lines = doc.line_map
    missing = [lid for ids in result.paragraph_lines.values() for lid in ids if lid not in lines]
    if missing:
        raise ConsistencyError(f"result names line {missing[0]} which is not in document {doc.id!r}")
    return {pid: containing_box([lines[i].box for i in ids])
            for pid, ids in result.paragraph_lines.items() if ids}


def render_svg(doc: Document, result: ReadingOrderResult, title: str | None = None) -> str:
    """SVG 1.1 text; identical inputs give identical output."""
    pboxes = paragraph_boxes(doc, result)
    if doc.lines:
        pts = np.concatenate([corners(ln.box) for ln in doc.lines])
        lo = pts.min(axis=0) - MARGIN
        hi = pts.max(axis=0) + MARGIN
    else:
        lo, hi = np.zeros(2), np.full(2, EMPTY_SIZE)
    w, h = hi - lo
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="{_fmt(lo[0])} {_fmt(lo[1])} {_fmt(w)} {_fmt(h)}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append(f'<rect x="{_fmt(lo[0])}" y="{_fmt(lo[1])}" width="{_fmt(w)}" height="{_fmt(h)}" fill="#ffffff"/>')

    out.append('<g id="paragraphs" fill-opacity="0.6" stroke="#999999" stroke-width="0.5">')
    for pid in result.paragraph_order:
        if pid not in pboxes:
            continue
        fill = ROW_FILL if result.paragraph_patterns.get(pid) == ROW else COL_FILL
        out.append(f'<polygon data-paragraph="{pid}" fill="{fill}" points="{_points(corners(pboxes[pid]))}"/>')
    out.append("</g>")

    out.append(f'<g id="lines" fill="none" stroke="{LINE_STROKE}" stroke-width="0.5">')
    for ln in doc.lines:
        out.append(f'<polygon data-line="{ln.id}" points="{_points(corners(ln.box))}"/>')
    out.append("</g>")

    centers = [(pboxes[p].cx, pboxes[p].cy) for p in result.paragraph_order if p in pboxes]
    if len(centers) >= 2:
        out.append(f'<polyline id="order" fill="none" stroke="{ORDER_STROKE}" stroke-width="2" '
                   f'points="{_points(centers)}"/>')
    if centers:
        x, y = centers[0]
        out.append(f'<circle id="start" cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="{ORDER_STROKE}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
