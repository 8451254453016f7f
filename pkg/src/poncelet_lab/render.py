"""Deterministic SVG rendering of the library's standard figures.

Conics are drawn as sampled polylines (256 samples), polygons as closed
paths, point sets as small circles. The world frame is mathematical (y up)
and is mapped to the y-down viewport by one affine transform; output bytes
depend only on the input document.
"""

from __future__ import annotations

import math

import numpy as np

from .conics import Conic, ConicClass, classify, ellipse_axes
from .errors import MissingLabel, NonConvexCell, DegenerateQuad
from .grid import build_grid, incircle_check, iter_cells
from .scene import SceneDocument, polygon_from_document

VIEW_W = VIEW_H = 800.0
_MARGIN = 0.05
CONIC_SAMPLES = 256

_STYLE = {
    "conic": 'fill="none" stroke="#4878a8" stroke-width="1.5"',
    "polygon": 'fill="none" stroke="#202020" stroke-width="1.2"',
    "gridline": 'stroke="#b0b0b0" stroke-width="0.8"',
    "gridpoint": 'fill="#c03028" stroke="none"',
    "incircle": 'fill="none" stroke="#2a7a2a" stroke-width="1.2"',
}


def _fmt(x: float) -> str:
    return format(x, ".3f")


class _Frame:
    """World bounding box to viewport transform (y flipped)."""

    def __init__(self, xs, ys):
        xmin, xmax = float(np.min(xs)), float(np.max(xs))
        ymin, ymax = float(np.min(ys)), float(np.max(ys))
        dx = max(xmax - xmin, 1e-9)
        dy = max(ymax - ymin, 1e-9)
        xmin -= _MARGIN * dx
        xmax += _MARGIN * dx
        ymin -= _MARGIN * dy
        ymax += _MARGIN * dy
        self.scale = min(VIEW_W / (xmax - xmin), VIEW_H / (ymax - ymin))
        self.x0 = xmin
        self.y1 = ymax
        self.bounds = (xmin, xmax, ymin, ymax)

    def px(self, x: float, y: float) -> tuple[float, float]:
        return (x - self.x0) * self.scale, (self.y1 - y) * self.scale


def _path(frame: _Frame, pts, closed: bool, style: str) -> str:
    coords = [frame.px(x, y) for x, y in pts]
    d = "M " + " L ".join(f"{_fmt(px)} {_fmt(py)}" for px, py in coords)
    if closed:
        d += " Z"
    return f'<path class="{style}" {_STYLE[style]} d="{d}"/>'


def _sample_ellipse(conic: Conic, count: int = CONIC_SAMPLES) -> np.ndarray:
    center, axes, radii = ellipse_axes(conic)
    t = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
    ring = center[:, None] + axes @ (radii[:, None] * np.vstack([np.cos(t), np.sin(t)]))
    return ring.T


def _conic_elements(frame: _Frame, conic: Conic) -> str:
    if classify(conic) is not ConicClass.REAL_ELLIPSE:
        raise MissingLabel("figure conics must be real ellipses")
    return _path(frame, _sample_ellipse(conic), closed=True, style="conic")


def _clip_line(frame: _Frame, line) -> list[tuple[float, float]]:
    a, b, c = line.v
    xmin, xmax, ymin, ymax = frame.bounds
    hits = []
    if abs(b) > 1e-14:
        for x in (xmin, xmax):
            y = (-c - a * x) / b
            if ymin - 1e-9 <= y <= ymax + 1e-9:
                hits.append((x, y))
    if abs(a) > 1e-14:
        for y in (ymin, ymax):
            x = (-c - b * y) / a
            if xmin - 1e-9 <= x <= xmax + 1e-9:
                hits.append((x, y))
    if len(hits) < 2:
        return []
    best = max(
        ((p, q) for i, p in enumerate(hits) for q in hits[i + 1 :]),
        key=lambda pq: (pq[0][0] - pq[1][0]) ** 2 + (pq[0][1] - pq[1][1]) ** 2,
    )
    return [best[0], best[1]]


def _line_element(frame: _Frame, line) -> str:
    seg = _clip_line(frame, line)
    if not seg:
        return ""
    (x1, y1), (x2, y2) = seg
    p1, p2 = frame.px(x1, y1), frame.px(x2, y2)
    return (
        f'<line class="gridline" {_STYLE["gridline"]} '
        f'x1="{_fmt(p1[0])}" y1="{_fmt(p1[1])}" x2="{_fmt(p2[0])}" y2="{_fmt(p2[1])}"/>'
    )


def _marker(frame: _Frame, x: float, y: float, r: float = 3.0) -> str:
    px, py = frame.px(x, y)
    return (
        f'<circle class="gridpoint" {_STYLE["gridpoint"]} '
        f'cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(r)}"/>'
    )


def _circle_element(frame: _Frame, center, radius: float) -> str:
    px, py = frame.px(center[0], center[1])
    return (
        f'<circle class="incircle" {_STYLE["incircle"]} '
        f'cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(radius * frame.scale)}"/>'
    )


def _svg(elements: list[str]) -> str:
    body = "\n".join(e for e in elements if e)
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{int(VIEW_W)}" height="{int(VIEW_H)}" '
        f'viewBox="0 0 {int(VIEW_W)} {int(VIEW_H)}">\n{body}\n</svg>\n'
    )


def _require(doc: SceneDocument, category: str, label: str):
    table = getattr(doc, category)
    if label not in table:
        raise MissingLabel(f"document lacks {category[:-1]} {label!r}")
    return table[label]


def _doc_conic(doc: SceneDocument, label: str) -> Conic:
    return Conic.from_vec6(_require(doc, "conics", label))


def _commute_figure(doc: SceneDocument, conic_labels: list[str]) -> str:
    polygons = [np.asarray(_require(doc, "polygons", lbl), dtype=float) for lbl in ("P", "D", "I", "ID")]
    conics = [_doc_conic(doc, lbl) for lbl in conic_labels]
    rings = [_sample_ellipse(c) for c in conics]
    cloud = np.vstack(polygons + rings)
    frame = _Frame(cloud[:, 0], cloud[:, 1])
    elements = [_conic_elements(frame, c) for c in conics]
    elements += [_path(frame, poly, closed=True, style="polygon") for poly in polygons]
    return _svg(elements)


def figure_pentagon(doc: SceneDocument) -> str:
    """Four polygon paths (P, D, I, ID = DI) over the two base conics."""
    return _commute_figure(doc, ["outer", "inner"])


def figure_kasner(doc: SceneDocument) -> str:
    """The n, k commutation figure: the pentagon layout plus the diagonal caustic."""
    return _commute_figure(doc, ["outer", "inner", "diag_caustic"])


def figure_grid(doc: SceneDocument) -> str:
    """n grid lines, all n(n+1)/2 grid points, and the concentric-set conics."""
    grid_points = np.asarray(_require(doc, "points", "grid"), dtype=float)
    poly = polygon_from_document(doc)
    fit_labels = sorted(lbl for lbl in doc.conics if lbl.endswith("_fit"))
    if not fit_labels:
        raise MissingLabel("document lacks fitted concentric conics")
    conics = [_doc_conic(doc, lbl) for lbl in fit_labels]
    rings = [_sample_ellipse(c) for c in conics]
    cloud = np.vstack([grid_points] + rings)
    frame = _Frame(cloud[:, 0], cloud[:, 1])
    elements = [_line_element(frame, l) for l in poly.side_lines]
    elements += [_conic_elements(frame, c) for c in conics]
    elements += [_marker(frame, x, y) for x, y in grid_points]
    return _svg(elements)


def figure_incircles(doc: SceneDocument) -> str:
    """One inscribed circle per convex grid cell, over the grid lines."""
    poly = polygon_from_document(doc)
    grid = build_grid(poly)
    results = []
    corners = []
    for i, j in iter_cells(grid.n):
        try:
            res = incircle_check(grid, i, j)
        except (NonConvexCell, DegenerateQuad):
            continue
        results.append(res)
        for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
            corners.append(grid.point(i + di, j + dj).affine())
    if not results:
        raise MissingLabel("no convex grid cells to draw")
    cloud = np.asarray(corners)
    frame = _Frame(cloud[:, 0], cloud[:, 1])
    elements = [_line_element(frame, l) for l in grid.lines]
    elements += [_circle_element(frame, r.center, r.radius) for r in results]
    return _svg(elements)


FIGURES = {
    "pentagon": figure_pentagon,
    "kasner-nk": figure_kasner,
    "grid": figure_grid,
    "incircles": figure_incircles,
}


def render_figure(doc: SceneDocument, figure: str) -> str:
    if figure not in FIGURES:
        raise MissingLabel(f"unknown figure {figure!r} (choose from {sorted(FIGURES)})")
    return FIGURES[figure](doc)
