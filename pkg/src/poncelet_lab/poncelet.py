"""Poncelet dynamics on nested ellipse pairs.

The chord step picks the tangent line from a point of the outer ellipse whose
tangency point with the inner ellipse advances in the requested direction
(counterclockwise is +1). Rotation numbers accumulate the polar angle around
the outer center with a branch-cut guard assuming each step advances less
than pi. Closure search bisects the inner family parameter and stops on the
measured n-step closure error, not on the rotation-number error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .confocal import ConfocalFamily, conic_at, ellipse_point_at
from .conics import (
    Conic,
    ConicClass,
    adjugate,
    classify,
    ellipse_axes,
    intersect_conic_line,
    principal_frame,
    tangency_point,
)
from .errors import (
    AmbiguousOrientation,
    BracketFailure,
    ClosureFailure,
    GeometryError,
    NoConvergence,
    NotCircumscribed,
    PointInsideConic,
    PointNotOnConic,
)
from .projective import HomLine, HomPoint, Polygon, join

_ON_CONIC_TOL = 1e-6
_SIDE_TANGENT_TOL = 1e-7


@dataclass(frozen=True)
class PonceletPair:
    """Nested real ellipses admitting a closed n-gon with the given winding."""

    outer: Conic
    inner: Conic
    n: int
    winding: int = 1
    closure_error: float = 0.0

    def __post_init__(self):
        if self.n < 5:
            raise ValueError("Poncelet pairs need n >= 5")
        if self.winding < 1:
            raise ValueError("winding must be >= 1")
        if math.gcd(self.winding, self.n) != 1:
            raise ValueError(f"winding {self.winding} and n {self.n} are not coprime")
        if not (np.isfinite(self.closure_error) and 0.0 <= self.closure_error < 1e-6):
            raise ClosureFailure(f"closure error {self.closure_error} too large for a pair")
        for name, conic in (("outer", self.outer), ("inner", self.inner)):
            if classify(conic) is not ConicClass.REAL_ELLIPSE:
                raise ValueError(f"{name} conic is not a real ellipse")
        _assert_nested(self.outer, self.inner)


def _assert_nested(outer: Conic, inner: Conic, samples: int = 64) -> None:
    center, axes, radii = ellipse_axes(inner)
    thetas = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    ring = center[:, None] + axes @ (radii[:, None] * np.vstack([np.cos(thetas), np.sin(thetas)]))
    for x, y in ring.T:
        if outer.evaluate(HomPoint(x, y)) >= 0.0:
            raise ValueError("inner ellipse is not strictly inside the outer one")


def _center_of(C: Conic) -> np.ndarray:
    # principal_frame skips classification so extreme ellipses still work
    center, _, _, _ = principal_frame(C)
    return center


def _angle_about(center: np.ndarray, p: HomPoint) -> float:
    xy = p.affine()
    return math.atan2(xy[1] - center[1], xy[0] - center[0])


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def tangent_lines_from(C: Conic, p: HomPoint) -> list[HomLine]:
    """Both tangent lines to C through an outside point.

    The line pencil through p is a line in the dual plane; intersecting it
    with the dual conic yields the tangents. A point on C gets its single
    tangent returned twice.
    """
    dual_points = intersect_conic_line(Conic(adjugate(C.m)), HomLine(p.v))
    if not dual_points:
        raise PointInsideConic("no real tangent lines from a point inside the conic")
    lines = [HomLine(q.v) for q in dual_points]
    if len(lines) == 1:
        lines = [lines[0], lines[0]]
    return lines


def chord_step(
    pair: PonceletPair, p: HomPoint, orientation: int = 1
) -> tuple[HomPoint, HomLine]:
    """One Poncelet step: tangent line from p to the inner conic, advanced
    in the chosen direction, intersected again with the outer conic."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    if pair.outer.point_residual(p) >= _ON_CONIC_TOL:
        raise PointNotOnConic("chord step requires a point on the outer conic")
    return _raw_chord_step(pair.outer, pair.inner, _center_of(pair.inner), p, orientation)


def _raw_chord_step(
    outer: Conic,
    inner: Conic,
    inner_center: np.ndarray,
    p: HomPoint,
    orientation: int,
) -> tuple[HomPoint, HomLine]:
    lines = tangent_lines_from(inner, p)
    touches = [tangency_point(inner, l, tol=1e-6) for l in lines]
    p_angle = _angle_about(inner_center, p)
    advances = [_wrap(_angle_about(inner_center, t) - p_angle) for t in touches]
    if min(abs(a) for a in advances) < 1e-12 or advances[0] * advances[1] > 0:
        raise AmbiguousOrientation("tangency points are not separated around the inner conic")
    side = lines[0] if advances[0] * orientation > 0 else lines[1]
    hits = intersect_conic_line(outer, side)
    if len(hits) != 2:
        raise AmbiguousOrientation("chord does not cross the outer conic twice")
    p_aff = p.affine()
    nxt = max(hits, key=lambda q: float(np.linalg.norm(q.affine() - p_aff)))
    return nxt, side


def _advance(
    outer: Conic,
    inner: Conic,
    p0: HomPoint,
    steps: int,
    orientation: int = 1,
) -> tuple[float, HomPoint]:
    """Total polar-angle advance around the outer center after `steps` steps."""
    outer_center = _center_of(outer)
    inner_center = _center_of(inner)
    total = 0.0
    p = p0
    theta = _angle_about(outer_center, p)
    for _ in range(steps):
        p, _ = _raw_chord_step(outer, inner, inner_center, p, orientation)
        new_theta = _angle_about(outer_center, p)
        total += _wrap(new_theta - theta)
        theta = new_theta
    return total, p


def rotation_number(
    outer: Conic, inner: Conic, p0: HomPoint, steps: int, orientation: int = 1
) -> float:
    """Average angular advance per chord step, as a fraction of a full turn."""
    if steps < 100:
        raise ValueError("rotation number needs at least 100 steps")
    total, _ = _advance(outer, inner, p0, steps, orientation)
    return total / (2.0 * math.pi * steps)


def measure_closure(outer: Conic, inner: Conic, n: int, p0: HomPoint) -> float:
    """Relative distance between p0 and its n-th chord iterate."""
    _, end = _advance(outer, inner, p0, n)
    _, _, radii = ellipse_axes(outer)
    return float(np.linalg.norm(end.affine() - p0.affine())) / (2.0 * float(radii.max()))


def find_closing_inner(
    family: ConfocalFamily,
    lam_outer: float,
    n: int,
    winding: int = 1,
    tol: float = 1e-12,
    max_iter: int = 240,
) -> PonceletPair:
    """Bisect the inner confocal parameter until the n-gon closes.

    The bracket is the full ellipse range below lam_outer; the sign being
    bisected is the n-step angular defect against 2*pi*winding, and the
    stopping criterion is the measured closure error.
    """
    if n < 5:
        raise ValueError("need n >= 5")
    if math.gcd(winding, n) != 1 or not (0 < winding / n < 0.5):
        raise ValueError(f"winding {winding} must be coprime to {n} with winding/n < 1/2")
    outer = conic_at(family, lam_outer)
    p0 = ellipse_point_at(family, lam_outer, 0.0)
    target = 2.0 * math.pi * winding
    span = lam_outer + family.b2
    hi = lam_outer - 1e-9 * span

    def defect(lam: float) -> tuple[float, HomPoint]:
        total, end = _advance(outer, conic_at(family, lam), p0, n)
        return total - target, end

    # walk the lower end toward the degenerate member until the defect
    # changes sign; very thin caustics are numerically delicate, so start
    # conservatively
    lo = None
    d_lo = -math.inf
    for eps in (1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        candidate = -family.b2 + eps * span
        try:
            d_candidate, _ = defect(candidate)
        except GeometryError:
            break
        if d_candidate > 0.0:
            lo, d_lo = candidate, d_candidate
            break
    d_hi, _ = defect(hi)
    if lo is None or not (d_lo > 0.0 > d_hi):
        raise BracketFailure(
            f"rotation number {winding}/{n} not bracketed on ({-family.b2}, {lam_outer})"
        )
    diam = 2.0 * math.sqrt(family.a2 + lam_outer)
    best = (math.inf, lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        d, end = defect(mid)
        err = float(np.linalg.norm(end.affine() - p0.affine())) / diam
        if err < best[0]:
            best = (err, mid)
        if err < tol:
            return PonceletPair(
                outer=outer,
                inner=conic_at(family, mid),
                n=n,
                winding=winding,
                closure_error=err,
            )
        if d > 0.0:
            lo = mid
        else:
            hi = mid
    raise NoConvergence(
        f"closure error stalled at {best[0]:.3e} (target {tol:.1e}) after {max_iter} bisections"
    )


@dataclass(frozen=True)
class PonceletPolygon:
    """Closed Poncelet polygon with its side lines and tangency data.

    side_lines and tangency_points are indexed so the tangency points are in
    cyclic angular order around the inner conic; side_order maps that index
    back to the vertex-order side join(V_i, V_{i+1}).
    """

    pair: PonceletPair
    polygon: Polygon
    side_lines: tuple[HomLine, ...]
    tangency_points: tuple[HomPoint, ...]
    side_order: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.polygon.n


def assemble_polygon(pair: PonceletPair, vertices) -> PonceletPolygon:
    """Build and validate a PonceletPolygon from its vertex cycle."""
    polygon = Polygon(vertices)
    if polygon.n != pair.n:
        raise ClosureFailure(f"expected {pair.n} vertices, got {polygon.n}")
    for v in polygon.vertices:
        if pair.outer.point_residual(v) >= _ON_CONIC_TOL:
            raise PointNotOnConic("polygon vertex is not on the outer conic")
    sides = polygon.side_lines()
    for l in sides:
        if pair.inner.line_residual(l) >= _SIDE_TANGENT_TOL:
            raise NotCircumscribed("polygon side is not tangent to the inner conic")
    touches = [tangency_point(pair.inner, l, tol=_SIDE_TANGENT_TOL) for l in sides]
    center = _center_of(pair.inner)
    angles = np.array([_angle_about(center, t) for t in touches])
    order = tuple(int(i) for i in np.argsort(angles))
    start = order.index(0)
    order = order[start:] + order[:start]
    if pair.winding == 1 and order != tuple(range(pair.n)):
        raise ClosureFailure("tangency points of a winding-1 polygon are out of cyclic order")
    return PonceletPolygon(
        pair=pair,
        polygon=polygon,
        side_lines=tuple(sides[i] for i in order),
        tangency_points=tuple(touches[i] for i in order),
        side_order=order,
    )


def build_polygon(pair: PonceletPair, p0: HomPoint, tol: float = 1e-7) -> PonceletPolygon:
    """Iterate n chord steps from p0 and assemble the closed polygon."""
    verts = [p0]
    p = p0
    inner_center = _center_of(pair.inner)
    for _ in range(pair.n):
        p, _ = _raw_chord_step(pair.outer, pair.inner, inner_center, p, 1)
        verts.append(p)
    miss = float(np.linalg.norm(verts[-1].affine() - p0.affine()))
    _, _, radii = ellipse_axes(pair.outer)
    if miss > tol * 2.0 * float(radii.max()):
        raise ClosureFailure(f"polygon misses its start by relative {miss:.3e}")
    return assemble_polygon(pair, verts[: pair.n])


def porism_check(pair: PonceletPair, samples: int = 20, seed: int = 0) -> float:
    """Max relative closure error over random starting points on the outer conic.

    Start angles are drawn from the seed, so results are deterministic and
    order-independent.
    """
    rng = np.random.default_rng(seed)
    thetas = np.sort(rng.uniform(0.0, 2.0 * math.pi, samples))
    center, axes, radii = ellipse_axes(pair.outer)
    worst = 0.0
    for theta in thetas:
        xy = center + axes @ (radii * np.array([math.cos(theta), math.sin(theta)]))
        err = measure_closure(pair.outer, pair.inner, pair.n, HomPoint(xy[0], xy[1]))
        worst = max(worst, err)
    return worst
