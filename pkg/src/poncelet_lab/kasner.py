"""Polygon diagonal and tangency maps, and their commutation checks.

diagonal_polygon is the depth-k diagonal map (k = 2 is the pentagram map);
tangency_polygon replaces a circumscribed polygon by its cyclic tangency
points. The commutation verifier discovers the label correspondence between
the two composition orders with a cyclic match rather than assuming one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .conics import Conic, conic_tangent_to_lines, fit_conic, pencil_rank, tangency_point, tangent_line_at
from .errors import (
    BadK,
    CoincidentLines,
    CoincidentPoints,
    DegenerateDiagonals,
    GeometryError,
    MatchFailure,
    MissingConic,
    NotCircumscribed,
)
from .grid import build_grid, concentric_set
from .poncelet import PonceletPolygon
from .projective import HomLine, HomPoint, Polygon, cyclic_match, join, meet

_TANGENT_TOL = 1e-7


def _check_k(n: int, k: int) -> None:
    if n < 5:
        raise BadK(f"diagonal maps need n >= 5, got n={n}")
    if not 2 <= k < n / 2:
        raise BadK(f"diagonal depth k={k} violates 2 <= k < n/2 for n={n}")


def diagonal_lines(poly: Polygon, k: int) -> list[HomLine]:
    """The k-diagonals join(V_i, V_{i+k}); each contains one side of D_k."""
    _check_k(poly.n, k)
    try:
        return [join(poly.vertex(i), poly.vertex(i + k)) for i in range(poly.n)]
    except CoincidentPoints as exc:
        raise DegenerateDiagonals("coincident vertices along a k-diagonal") from exc


def diagonal_polygon(poly: Polygon, k: int) -> Polygon:
    """Polygon of consecutive k-diagonal intersections."""
    diag = diagonal_lines(poly, k)
    n = poly.n
    try:
        verts = [meet(diag[i], diag[(i + 1) % n]) for i in range(n)]
        return Polygon(verts)
    except (CoincidentLines, ValueError) as exc:
        raise DegenerateDiagonals(f"consecutive {k}-diagonals degenerate: {exc}") from exc


def _conic_tangent_to_all(lines: Sequence[HomLine], tol: float) -> Conic:
    n = len(lines)
    picks = sorted({(m * n) // 5 for m in range(5)})
    conic = conic_tangent_to_lines([lines[i] for i in picks])
    worst = max(conic.line_residual(l) for l in lines)
    if worst >= tol:
        raise NotCircumscribed(f"tangency residual {worst:.3e} exceeds {tol:.1e}")
    return conic


def inscribed_conic(poly: Polygon, tol: float = _TANGENT_TOL) -> Conic:
    """Conic tangent to all side lines, fitted on five spread-out ones.

    Exact for pentagons; for n > 5 the remaining sides are residual-checked.
    """
    return _conic_tangent_to_all(poly.side_lines(), tol)


def tangency_polygon(
    poly: Polygon, inscribed: Optional[Conic] = None, tol: float = _TANGENT_TOL
) -> Polygon:
    """Polygon of the sides' tangency points with the inscribed conic.

    A pentagon determines its inscribed conic exactly; for n > 5 the conic
    must be supplied (Poncelet input).
    """
    if inscribed is None:
        if poly.n != 5:
            raise MissingConic("an inscribed conic must be supplied for n > 5")
        inscribed = conic_tangent_to_lines(poly.side_lines())
    sides = poly.side_lines()
    for l in sides:
        if inscribed.line_residual(l) >= tol:
            raise NotCircumscribed(
                f"side residual {inscribed.line_residual(l):.3e} exceeds {tol:.1e}"
            )
    return Polygon([tangency_point(inscribed, l, tol=tol) for l in sides])


@dataclass(frozen=True)
class CommutationReport:
    """Outcome of an ID_k vs D_k I comparison."""

    n: int
    k: int
    max_vertex_error: float
    shift: int
    orientation: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_vertex_error < self.tol

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "max_vertex_error": self.max_vertex_error,
            "shift": self.shift,
            "orientation": self.orientation,
            "tol": self.tol,
            "passed": self.passed,
        }


def commute_check(
    poly: Union[PonceletPolygon, Polygon], k: int, tol: float = 1e-8
) -> CommutationReport:
    """Verify that the tangency and diagonal maps commute on this polygon.

    One leg applies the tangency map after the diagonal map, taking the
    conic inscribed in D_k to be the conic tangent to the k-diagonal lines;
    the other applies the diagonal map to the tangency polygon. The two
    results are matched as labeled cycles.
    """
    if isinstance(poly, PonceletPolygon):
        base, gamma = poly.polygon, poly.pair.inner
    else:
        base, gamma = poly, None
    _check_k(base.n, k)

    tangency = tangency_polygon(base, gamma)
    leg_di = diagonal_polygon(tangency, k)

    diag_poly = diagonal_polygon(base, k)
    diag_caustic = _conic_tangent_to_all(diagonal_lines(base, k), _TANGENT_TOL)
    leg_id = tangency_polygon(diag_poly, diag_caustic)

    match = cyclic_match(leg_id, leg_di, tol)
    if match is None:
        raise MatchFailure(f"no cyclic shift aligns ID_{k} with D_{k}I at tol {tol:.1e}")
    return CommutationReport(
        n=base.n,
        k=k,
        max_vertex_error=match.error,
        shift=match.shift,
        orientation=match.orientation,
        tol=tol,
    )


def outer_tangent_intersections(poly: PonceletPolygon, k: int) -> list[HomPoint]:
    """Intersections L_i cap L_{i+k} of the outer-conic tangents at the vertices."""
    _check_k(poly.n, k)
    outer = poly.pair.outer
    tangents = [tangent_line_at(outer, v, tol=1e-6) for v in poly.polygon.vertices]
    return [meet(tangents[i], tangents[(i + k) % poly.n]) for i in range(poly.n)]


@dataclass(frozen=True)
class PencilRemarkReport:
    """Rank data for the pencil remark and its confocal non-claim."""

    rank_gap: float
    passed: bool
    pencil_rank: int
    confocal_rank: int
    confocal_gap: float
    tol: float

    def to_dict(self) -> dict:
        return {
            "rank_gap": self.rank_gap,
            "passed": self.passed,
            "pencil_rank": self.pencil_rank,
            "confocal_rank": self.confocal_rank,
            "confocal_gap": self.confocal_gap,
            "tol": self.tol,
        }


def pencil_remark_check(
    poly: PonceletPolygon, k: int, tol: float = 1e-8
) -> PencilRemarkReport:
    """The outer conic, the Q_k conic, and their transported image form a pencil.

    delta is fitted through the grid set Q_k; Delta through the intersections
    of the outer tangent lines at index offset k (the image of delta under
    the transport taking tangency points to vertices). The confocal triple
    {outer, inner, delta} is verified to have full rank 3: confocal conics
    are not a pencil.
    """
    _check_k(poly.n, k)
    grid = build_grid(poly)
    q_k = [p for p in concentric_set(grid, k) if not p.is_ideal]
    delta, _ = fit_conic(q_k)
    big_delta, _ = fit_conic(outer_tangent_intersections(poly, k))
    gamma = poly.pair.inner
    outer = poly.pair.outer

    rank, gap = pencil_rank([outer, delta, big_delta])
    confocal_rank, confocal_gap = pencil_rank([outer, gamma, delta])
    return PencilRemarkReport(
        rank_gap=gap,
        passed=rank <= 2 and gap < tol,
        pencil_rank=rank,
        confocal_rank=confocal_rank,
        confocal_gap=confocal_gap,
        tol=tol,
    )


@dataclass
class OrbitRecord:
    """Iterates of a polygon map with per-step diameter and centroid."""

    polygons: list[Polygon]
    diameters: list[float]
    centroids: list[np.ndarray]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.polygons)


def iterate_map(poly: Polygon, op: str, steps: int, k: int = 2) -> OrbitRecord:
    """Orbit of the diagonal map ("D") or tangency-then-diagonal map ("ID").

    The orbit stops early (truncated) when an iterate degenerates. This is an
    exploration utility; no convergence claims are made about the limit.
    """
    if op not in ("D", "ID"):
        raise ValueError("op must be 'D' or 'ID'")
    record = OrbitRecord(
        polygons=[poly], diameters=[poly.diameter()], centroids=[poly.centroid()]
    )
    current = poly
    for _ in range(steps):
        try:
            if op == "ID":
                conic = None if current.n == 5 else inscribed_conic(current)
                current = tangency_polygon(current, conic)
            current = diagonal_polygon(current, k)
        except GeometryError:
            record.truncated = True
            break
        record.polygons.append(current)
        record.diameters.append(current.diameter())
        record.centroids.append(current.centroid())
    return record
