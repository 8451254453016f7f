"""Poncelet grids and verification of the grid theorem.

The grid of an odd Poncelet n-gon is the n(n+1)/2 pairwise intersections of
its extended side lines, with the self-intersection of a line defined as its
tangency point with the inner conic. Ideal intersection points from parallel
tangent lines are stored and flagged but excluded from Euclidean fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .confocal import ConfocalFamily, params_through_point, transport_map
from .conics import (
    Conic,
    ConicClass,
    adjugate,
    classify,
    conic_through_points,
    dual,
    fit_conic,
    pencil_rank,
    transform_conic,
)
from .errors import (
    CoincidentLines,
    DegenerateInput,
    DegenerateQuad,
    EvenN,
    FitFailure,
    IndexOutOfRange,
    NearParallelLines,
    NonConvexCell,
    NoSignMatches,
    NotConfocal,
)
from .poncelet import PonceletPolygon
from .projective import (
    HomLine,
    HomPoint,
    ProjMap,
    apply_line,
    apply_point,
    map_from_correspondence,
    meet,
)


def _key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


@dataclass(frozen=True)
class PonceletGrid:
    """n odd tangent lines plus their n(n+1)/2 intersection/tangency points."""

    n: int
    lines: tuple[HomLine, ...]
    inner: Conic
    points: Mapping[tuple[int, int], HomPoint]
    ideal_pairs: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def point(self, i: int, j: int) -> HomPoint:
        return self.points[_key(i % self.n, j % self.n)]


def build_grid(poly: PonceletPolygon) -> PonceletGrid:
    """All pairwise meets of the side lines, tangency points on the diagonal."""
    n = poly.n
    if n % 2 == 0:
        raise EvenN("the grid construction assumes an odd number of sides")
    lines = poly.side_lines
    points: dict[tuple[int, int], HomPoint] = {}
    ideal: set[tuple[int, int]] = set()
    for i in range(n):
        points[(i, i)] = poly.tangency_points[i]
        for j in range(i + 1, n):
            try:
                pt = meet(lines[i], lines[j])
            except CoincidentLines as exc:
                raise NearParallelLines(f"grid lines {i} and {j} coincide") from exc
            points[(i, j)] = pt
            if pt.is_ideal:
                ideal.add((i, j))
    return PonceletGrid(
        n=n,
        lines=tuple(lines),
        inner=poly.pair.inner,
        points=points,
        ideal_pairs=frozenset(ideal),
    )


def concentric_set(grid: PonceletGrid, k: int) -> list[HomPoint]:
    """Q_k: the n points with cyclic index difference k; Q_0 are the
    tangency points and Q_1 the polygon vertices."""
    if not 0 <= k <= (grid.n - 1) // 2:
        raise IndexOutOfRange(f"concentric index {k} outside 0..{(grid.n - 1) // 2}")
    return [grid.point(m, m + k) for m in range(grid.n)]


def radial_set(grid: PonceletGrid, k: int) -> list[HomPoint]:
    """R_k: the (n+1)/2 points with cyclic index sum k."""
    n = grid.n
    if not 0 <= k < n:
        raise IndexOutOfRange(f"radial index {k} outside 0..{n - 1}")
    seen: list[tuple[int, int]] = []
    for m in range(n):
        key = _key(m, (k - m) % n)
        if key not in seen:
            seen.append(key)
    points = [grid.points[key] for key in seen]
    assert len(points) == (n + 1) // 2
    return points


def _usable(grid: PonceletGrid, keys: Sequence[tuple[int, int]]) -> list[HomPoint]:
    return [grid.points[k] for k in keys if k not in grid.ideal_pairs]


def _fit_set(points: Sequence[HomPoint]) -> tuple[Conic, float]:
    """Exact construction for five points, total least squares beyond."""
    affine = [p for p in points if not p.is_ideal]
    if len(affine) == 5:
        conic = conic_through_points(affine)
        residual = max(conic.point_residual(p) for p in affine)
        return conic, residual
    return fit_conic(affine)


@dataclass
class SetFit:
    kind: str
    k: int
    conic: Conic
    residual: float
    conic_class: ConicClass


@dataclass
class GridReport:
    """Self-describing verification record; every check carries its tolerance."""

    n: int
    tol: float
    q_fits: list[SetFit]
    r_fits: list[SetFit]
    dual_pencil_rank: int
    dual_pencil_gap: float
    equivalence_residuals: np.ndarray
    q0_inner_gap: float
    ideal_pairs: list[tuple[int, int]]

    @property
    def passed(self) -> bool:
        q_ok = all(
            f.residual < self.tol and f.conic_class is ConicClass.REAL_ELLIPSE
            for f in self.q_fits
        )
        r_ok = all(f.conic_class is ConicClass.HYPERBOLA for f in self.r_fits)
        equiv_ok = bool(self.equivalence_residuals.max() < self.tol)
        return (
            q_ok
            and r_ok
            and self.dual_pencil_rank <= 2
            and self.dual_pencil_gap < self.tol
            and self.q0_inner_gap < self.tol
            and equiv_ok
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tol": self.tol,
            "passed": self.passed,
            "q_fits": [
                {
                    "k": f.k,
                    "conic": f.conic.vec6.tolist(),
                    "residual": f.residual,
                    "class": f.conic_class.value,
                }
                for f in self.q_fits
            ],
            "r_fits": [
                {
                    "k": f.k,
                    "conic": f.conic.vec6.tolist(),
                    "residual": f.residual,
                    "class": f.conic_class.value,
                }
                for f in self.r_fits
            ],
            "dual_pencil_rank": self.dual_pencil_rank,
            "dual_pencil_gap": self.dual_pencil_gap,
            "equivalence_residuals": self.equivalence_residuals.tolist(),
            "q0_inner_gap": self.q0_inner_gap,
            "ideal_pairs": [list(p) for p in self.ideal_pairs],
        }


def _radial_keys(grid: PonceletGrid, k: int) -> list[tuple[int, int]]:
    seen: list[tuple[int, int]] = []
    for m in range(grid.n):
        key = _key(m, (k - m) % grid.n)
        if key not in seen:
            seen.append(key)
    return seen


def _pencil_member_through(points: Sequence[HomPoint], basis: tuple[Conic, Conic]) -> Conic:
    """Member of the dual pencil span(basis) passing through the given points.

    Each point imposes a homogeneous quadratic on the dual-pencil coordinates
    (the primal matrix is the adjugate of the dual combination, quadratic in
    it); the root consistent with all points is selected.
    """
    d1, d2 = basis[0].m, basis[1].m
    adj1 = adjugate(d1)
    adj2 = adjugate(d2)
    mixed = adjugate(d1 + d2) - adj1 - adj2

    def primal(alpha: float, beta: float) -> np.ndarray:
        return alpha * alpha * adj1 + alpha * beta * mixed + beta * beta * adj2

    p = points[0].v / np.linalg.norm(points[0].v)
    qa = float(p @ adj1 @ p)
    qm = float(p @ mixed @ p)
    qb = float(p @ adj2 @ p)
    disc = qm * qm - 4.0 * qa * qb
    if disc < 0.0:
        raise FitFailure("no real dual-pencil member through the set")
    sq = math.sqrt(disc)
    candidates = []
    for sgn in (1.0, -1.0):
        alpha, beta = -qm + sgn * sq, 2.0 * qa
        alt = (2.0 * qb, -qm - sgn * sq)
        if np.hypot(*alt) > np.hypot(alpha, beta):
            alpha, beta = alt
        if np.hypot(alpha, beta) == 0.0:
            continue
        candidates.append(Conic(primal(alpha, beta)))
    best = None
    for cand in candidates:
        residual = max(cand.point_residual(q) for q in points)
        if best is None or residual < best[0]:
            best = (residual, cand)
    if best is None or best[0] > 1e-6:
        raise FitFailure("dual-pencil member misses the remaining set points")
    return best[1]


def verify_grid_theorem(grid: PonceletGrid, tol: float = 1e-7) -> GridReport:
    """Check the three grid-theorem claims numerically.

    (i) concentric sets fit nested real ellipses and radial sets classify as
    hyperbolas, (ii) the duals of all fitted conics form a rank <= 2 pencil
    (the four common tangent lines), (iii) all concentric sets are related by
    projective maps discovered over cyclic shifts and reversal.
    """
    n = grid.n
    half = (n + 1) // 2
    q_fits: list[SetFit] = []
    for k in range(half):
        pts = [p for p in concentric_set(grid, k) if not p.is_ideal]
        try:
            conic, residual = _fit_set(pts)
        except DegenerateInput as exc:
            raise FitFailure(f"concentric set Q_{k} failed to fit") from exc
        q_fits.append(SetFit("Q", k, conic, residual, classify(conic)))

    q0_inner_gap = q_fits[0].conic.distance_to(grid.inner)

    duals = [dual(f.conic) for f in q_fits]
    basis = _dual_basis(duals)

    r_fits: list[SetFit] = []
    for k in range(n):
        pts = [grid.points[key] for key in _radial_keys(grid, k) if key not in grid.ideal_pairs]
        if len(pts) >= 5:
            try:
                conic, residual = _fit_set(pts)
            except DegenerateInput as exc:
                raise FitFailure(f"radial set R_{k} failed to fit") from exc
        else:
            # n = 7: four points only; the fit is pinned by membership in the
            # dual pencil, and only the classification is meaningful.
            conic = _pencil_member_through(pts, basis)
            residual = max(conic.point_residual(p) for p in pts)
        r_fits.append(SetFit("R", k, conic, residual, classify(conic)))

    all_duals = duals + [dual(f.conic) for f in r_fits]
    rank, gap = pencil_rank(all_duals)

    equivalence = np.zeros((half, half))
    q_sets = [concentric_set(grid, k) for k in range(half)]
    for i in range(half):
        for j in range(i, half):
            err = _best_equivalence(q_sets[i], q_sets[j])
            equivalence[i, j] = equivalence[j, i] = err

    return GridReport(
        n=n,
        tol=tol,
        q_fits=q_fits,
        r_fits=r_fits,
        dual_pencil_rank=rank,
        dual_pencil_gap=gap,
        equivalence_residuals=equivalence,
        q0_inner_gap=q0_inner_gap,
        ideal_pairs=sorted(grid.ideal_pairs),
    )


def _dual_basis(duals: Sequence[Conic]) -> tuple[Conic, Conic]:
    rows = np.array([d.vec6 / np.linalg.norm(d.vec6) for d in duals])
    _, _, vt = np.linalg.svd(rows)
    return Conic.from_vec6(vt[0]), Conic.from_vec6(vt[1])


def _best_equivalence(src: Sequence[HomPoint], dst: Sequence[HomPoint]) -> float:
    """Best projective-match residual over cyclic shifts and reversal.

    Point m of one concentric set corresponds to point (shift +/- m) of the
    other; the labeling is not pinned by the construction, so all candidates
    are scanned.
    """
    n = len(src)
    anchors = [0, n // 4, n // 2, (3 * n) // 4]
    dst_aff = np.array([p.affine() for p in dst])
    diam = float(
        np.sqrt(((dst_aff[:, None, :] - dst_aff[None, :, :]) ** 2).sum(axis=2)).max()
    )
    best = math.inf
    for orientation in (1, -1):
        for shift in range(n):
            index = [(shift + orientation * m) % n for m in range(n)]
            try:
                mapping = map_from_correspondence(
                    [src[m] for m in anchors], [dst[index[m]] for m in anchors]
                )
            except Exception:
                continue
            err = 0.0
            for m in range(n):
                image = apply_point(mapping, src[m])
                if image.is_ideal:
                    err = math.inf
                    break
                err = max(err, float(np.linalg.norm(image.affine() - dst_aff[index[m]])))
            best = min(best, err / diam)
    return best


@dataclass
class ConfocalGridParams:
    """Family parameters recovered per set, with their spreads."""

    q_params: tuple[float, ...]
    r_params: tuple[float, ...]
    q_spreads: tuple[float, ...]
    r_spreads: tuple[float, ...]


def confocal_grid_check(
    grid: PonceletGrid, family: ConfocalFamily, tol: float = 1e-8
) -> ConfocalGridParams:
    """Each concentric/radial set shares one confocal parameter.

    Concentric sets must land in the ellipse band and radial sets in the
    hyperbola band; the spread within each set must stay below tol.
    """
    q_params, q_spreads = [], []
    for k in range((grid.n + 1) // 2):
        lam, spread = _common_param(grid, family, concentric_set(grid, k), ellipse=True)
        if spread >= tol:
            raise NotConfocal(f"concentric set Q_{k} parameter spread {spread:.3e}")
        q_params.append(lam)
        q_spreads.append(spread)
    r_params, r_spreads = [], []
    for k in range(grid.n):
        pts = [grid.points[key] for key in _radial_keys(grid, k) if key not in grid.ideal_pairs]
        lam, spread = _common_param(grid, family, pts, ellipse=False)
        if spread >= tol:
            raise NotConfocal(f"radial set R_{k} parameter spread {spread:.3e}")
        r_params.append(lam)
        r_spreads.append(spread)
    return ConfocalGridParams(
        q_params=tuple(q_params),
        r_params=tuple(r_params),
        q_spreads=tuple(q_spreads),
        r_spreads=tuple(r_spreads),
    )


def _common_param(
    grid: PonceletGrid,
    family: ConfocalFamily,
    points: Sequence[HomPoint],
    ellipse: bool,
) -> tuple[float, float]:
    values = []
    for p in points:
        if p.is_ideal:
            continue
        roots = params_through_point(family, p)
        band = [
            t
            for t in roots
            if (family.is_ellipse_param(t) if ellipse else family.is_hyperbola_param(t))
        ]
        if not band:
            kind = "ellipse" if ellipse else "hyperbola"
            raise NotConfocal(f"point {p} has no {kind}-band family parameter")
        values.append(band[0])
    return float(np.mean(values)), float(np.max(values) - np.min(values))


def transport_check(
    grid: PonceletGrid,
    family: ConfocalFamily,
    i: int,
    j: int,
    tol: float = 1e-9,
) -> tuple[int, float]:
    """Find the sign for which the diagonal transport maps Q_i onto Q_j.

    Matching is nearest-point on sets; returns the matching sign and its
    maximum relative error.
    """
    src = [p for p in concentric_set(grid, i) if not p.is_ideal]
    dst = [p for p in concentric_set(grid, j) if not p.is_ideal]
    lam_i, _ = _common_param(grid, family, src, ellipse=True)
    lam_j, _ = _common_param(grid, family, dst, ellipse=True)
    dst_aff = np.array([p.affine() for p in dst])
    diam = float(
        np.sqrt(((dst_aff[:, None, :] - dst_aff[None, :, :]) ** 2).sum(axis=2)).max()
    )
    errors = {}
    for sign in (1, -1):
        mapping = transport_map(family, lam_i, lam_j, sign)
        worst = 0.0
        for p in src:
            image = apply_point(mapping, p).affine()
            nearest = float(np.linalg.norm(dst_aff - image, axis=1).min())
            worst = max(worst, nearest)
        err = worst / diam
        errors[sign] = err
        if err < tol:
            return sign, err
    raise NoSignMatches(
        f"neither transport sign maps Q_{i} to Q_{j}: errors {errors[1]:.3e} / {errors[-1]:.3e}"
    )


@dataclass
class IncircleResult:
    center: np.ndarray
    radius: float
    max_tangency_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_tangency_error < self.tol * self.radius


def iter_cells(n: int) -> Iterator[tuple[int, int]]:
    """Index pairs (i, j) of grid cells bounded by lines i, i+1, j, j+1."""
    for i in range(n):
        for j in range(i + 2, n):
            if j - i <= n - 2:
                yield i, j


def incircle_check(grid: PonceletGrid, i: int, j: int, tol: float = 1e-8) -> IncircleResult:
    """Inscribed-circle test for the quadrilateral cell (i, j).

    The circle tangent to three of the cell's lines is built from interior
    angle bisectors; the reported error is the worst distance discrepancy of
    the four side lines against the radius.
    """
    n = grid.n
    idx = {i % n, (i + 1) % n} & {j % n, (j + 1) % n}
    if idx:
        raise DegenerateQuad(f"cell ({i}, {j}) reuses a grid line")
    corners = [
        grid.point(i, j),
        grid.point(i + 1, j),
        grid.point(i + 1, j + 1),
        grid.point(i, j + 1),
    ]
    if any(c.is_ideal for c in corners):
        raise DegenerateQuad(f"cell ({i}, {j}) has an ideal corner")
    quad = np.array([c.affine() for c in corners])
    scale = float(np.linalg.norm(quad.max(axis=0) - quad.min(axis=0)))
    crosses = []
    for m in range(4):
        a, b, c = quad[m], quad[(m + 1) % 4], quad[(m + 2) % 4]
        crosses.append(float(np.cross(b - a, c - b)))
    if any(abs(c) < 1e-14 * scale * scale for c in crosses):
        raise DegenerateQuad(f"cell ({i}, {j}) has collinear corners")
    if not (all(c > 0 for c in crosses) or all(c < 0 for c in crosses)):
        raise NonConvexCell(f"cell ({i}, {j}) is not convex")

    center = _bisector_center(quad)
    sides = [
        grid.lines[j % n],        # corner0 -> corner1
        grid.lines[(i + 1) % n],  # corner1 -> corner2
        grid.lines[(j + 1) % n],  # corner2 -> corner3
        grid.lines[i % n],        # corner3 -> corner0
    ]
    dists = [_line_distance(l, center) for l in sides]
    radius = dists[1]
    err = max(abs(d - radius) for d in dists)
    return IncircleResult(center=center, radius=radius, max_tangency_error=err, tol=tol)


def _bisector_center(quad: np.ndarray) -> np.ndarray:
    """Meet of the interior angle bisectors at the second and third corners."""
    def bisector(at: int) -> tuple[np.ndarray, np.ndarray]:
        prev_dir = quad[at - 1] - quad[at]
        next_dir = quad[(at + 1) % 4] - quad[at]
        direction = prev_dir / np.linalg.norm(prev_dir) + next_dir / np.linalg.norm(next_dir)
        return quad[at], direction

    (p1, d1), (p2, d2) = bisector(1), bisector(2)
    mat = np.column_stack([d1, -d2])
    if abs(np.linalg.det(mat)) < 1e-14:
        raise DegenerateQuad("angle bisectors are parallel")
    t = np.linalg.solve(mat, p2 - p1)
    return p1 + t[0] * d1


def _line_distance(line: HomLine, point: np.ndarray) -> float:
    a, b, c = line.v
    return abs(a * point[0] + b * point[1] + c) / math.hypot(a, b)


def transform_grid(mapping: ProjMap, grid: PonceletGrid) -> PonceletGrid:
    """Image grid under a projective map (lines, points, and inner conic)."""
    points = {key: apply_point(mapping, p) for key, p in grid.points.items()}
    ideal = frozenset(key for key, p in points.items() if p.is_ideal and key[0] != key[1])
    return PonceletGrid(
        n=grid.n,
        lines=tuple(apply_line(mapping, l) for l in grid.lines),
        inner=transform_conic(mapping, grid.inner),
        points=points,
        ideal_pairs=ideal,
    )
