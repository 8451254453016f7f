"""Conics as symmetric 3x3 forms: construction, incidence, duality, pencils.

A conic is the coefficient matrix of A x^2 + B xy + C y^2 + D xw + E yw + F w^2,
stored Frobenius-normalized with the first nonzero coefficient positive.
Duals and poles use the adjugate rather than the inverse so near-degenerate
conics degrade gracefully. Rank thresholds are singular-value ratios.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateConic,
    DegenerateInput,
    LineNotTangent,
    PointNotOnConic,
    SingularDual,
)
from .projective import HomLine, HomPoint, ProjMap

RANK_RATIO = 1e-8
DEGENERACY_TOL = 1e-10
_PARABOLA_TOL = 1e-12
_DISC_TOL = 1e-10


def adjugate(m: np.ndarray) -> np.ndarray:
    """Adjugate of a 3x3 matrix via explicit cofactors."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    return np.array(
        [
            [e * i - f * h, c * h - b * i, b * f - c * e],
            [f * g - d * i, a * i - c * g, c * d - a * f],
            [d * h - e * g, b * g - a * h, a * e - b * d],
        ]
    )


class ConicClass(str, enum.Enum):
    REAL_ELLIPSE = "real_ellipse"
    HYPERBOLA = "hyperbola"
    PARABOLA = "parabola"
    DEGENERATE = "degenerate"
    IMAGINARY_ELLIPSE = "imaginary_ellipse"


class Conic:
    """Symmetric coefficient matrix up to scale, canonically normalized."""

    __slots__ = ("m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(m)):
            raise DegenerateInput("conic matrix must be finite")
        m = 0.5 * (m + m.T)
        norm = np.linalg.norm(m)
        if norm == 0.0:
            raise DegenerateInput("conic matrix is zero")
        m = m / norm
        vec = _vec6_of(m)
        lead = np.abs(vec)
        first = int(np.argmax(lead > 1e-12 * lead.max()))
        if vec[first] < 0:
            m = -m
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __setattr__(self, name, value):
        raise AttributeError("Conic is immutable")

    @classmethod
    def from_vec6(cls, coeffs) -> "Conic":
        a, b, c, d, e, f = np.asarray(coeffs, dtype=float)
        return cls([[a, b / 2, d / 2], [b / 2, c, e / 2], [d / 2, e / 2, f]])

    @property
    def vec6(self) -> np.ndarray:
        """(A, B, C, D, E, F) coefficient vector for the normalized matrix."""
        return _vec6_of(self.m)

    def evaluate(self, p: HomPoint) -> float:
        """Signed quadratic form value at the canonical representative."""
        u = p.v / np.linalg.norm(p.v)
        return float(u @ self.m @ u)

    def point_residual(self, p: HomPoint) -> float:
        return abs(self.evaluate(p))

    def line_residual(self, l: HomLine) -> float:
        """Scale-free tangency residual |l^T adj(M) l|."""
        adj = adjugate(self.m)
        u = l.v / np.linalg.norm(l.v)
        return abs(float(u @ adj @ u)) / np.linalg.norm(adj)

    def is_same(self, other: "Conic", tol: float = 1e-10) -> bool:
        return bool(np.linalg.norm(self.m - other.m) < tol)

    def distance_to(self, other: "Conic") -> float:
        return float(np.linalg.norm(self.m - other.m))

    def __repr__(self) -> str:
        a, b, c, d, e, f = self.vec6
        return f"Conic({a:.4g} x2 + {b:.4g} xy + {c:.4g} y2 + {d:.4g} x + {e:.4g} y + {f:.4g})"


def _vec6_of(m: np.ndarray) -> np.ndarray:
    return np.array([m[0, 0], 2 * m[0, 1], m[1, 1], 2 * m[0, 2], 2 * m[1, 2], m[2, 2]])


def _design_row(v: np.ndarray) -> list[float]:
    x, y, w = v / np.linalg.norm(v)
    return [x * x, x * y, y * y, x * w, y * w, w * w]


def _matrix_of_vec6(c: np.ndarray) -> np.ndarray:
    return np.array(
        [[c[0], c[1] / 2, c[3] / 2], [c[1] / 2, c[2], c[4] / 2], [c[3] / 2, c[4] / 2, c[5]]]
    )


def _nullspace_conic(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """One-dimensional nullspace of the design matrix, as a conic matrix."""
    design = np.array([_design_row(v) for v in vectors])
    s = np.linalg.svd(design, compute_uv=False)
    if s[4] <= RANK_RATIO * s[0]:
        raise DegenerateInput("configuration does not determine a unique conic")
    _, _, vt = np.linalg.svd(design)
    return _matrix_of_vec6(vt[-1])


def conic_through_points(points: Sequence[HomPoint]) -> Conic:
    """Unique conic through five points, no four of them collinear."""
    if len(points) != 5:
        raise DegenerateInput("exactly five points required")
    return Conic(_nullspace_conic([p.v for p in points]))


def conic_tangent_to_lines(lines: Sequence[HomLine]) -> Conic:
    """Unique conic tangent to five lines, no four of them concurrent.

    Builds the dual conic through the five dual points and returns its
    adjugate.
    """
    if len(lines) != 5:
        raise DegenerateInput("exactly five lines required")
    dual_m = _nullspace_conic([l.v for l in lines])
    det = np.linalg.det(dual_m / np.linalg.norm(dual_m))
    if abs(det) < DEGENERACY_TOL:
        raise SingularDual("dual conic of the five lines is degenerate")
    return Conic(adjugate(dual_m))


def tangent_line_at(C: Conic, p: HomPoint, tol: float = 1e-8) -> HomLine:
    """Polar line of an on-conic point, i.e. the tangent there."""
    if C.point_residual(p) >= tol:
        raise PointNotOnConic(f"residual {C.point_residual(p):.2e} exceeds {tol:.1e}")
    return HomLine(C.m @ p.v)


def tangency_point(C: Conic, l: HomLine, tol: float = 1e-8) -> HomPoint:
    """Pole of a tangent line, i.e. its point of tangency."""
    if C.line_residual(l) >= tol:
        raise LineNotTangent(f"dual residual {C.line_residual(l):.2e} exceeds {tol:.1e}")
    return HomPoint(adjugate(C.m) @ l.v)


def _line_base_points(l: HomLine) -> tuple[np.ndarray, np.ndarray]:
    cands = sorted((np.cross(l.v, e) for e in np.eye(3)), key=np.linalg.norm, reverse=True)
    p0, p1 = cands[0], cands[1]
    return p0 / np.linalg.norm(p0), p1 / np.linalg.norm(p1)


def intersect_conic_line(C: Conic, l: HomLine, disc_tol: float = _DISC_TOL) -> list[HomPoint]:
    """Real intersections of a nondegenerate conic with a line.

    Returns two points for a secant, one for a tangent (double root within
    the discriminant tolerance), none when the line misses the conic.
    """
    if abs(np.linalg.det(C.m)) < DEGENERACY_TOL:
        raise DegenerateConic("conic-line intersection requires a nondegenerate conic")
    p0, p1 = _line_base_points(l)
    alpha = float(p0 @ C.m @ p0)
    beta = 2.0 * float(p0 @ C.m @ p1)
    gamma = float(p1 @ C.m @ p1)
    scale = max(abs(alpha), abs(beta), abs(gamma))
    if scale == 0.0:
        raise DegenerateConic("line lies on the conic")
    disc = beta * beta - 4.0 * alpha * gamma
    rel = disc / (scale * scale)
    if rel < -disc_tol:
        return []
    if rel <= disc_tol:
        s, t = _larger((-beta, 2.0 * alpha), (2.0 * gamma, -beta))
        return [HomPoint(s * p0 + t * p1)]
    sq = np.sqrt(disc)
    roots = []
    for sgn in (1.0, -1.0):
        s, t = _larger((-beta + sgn * sq, 2.0 * alpha), (2.0 * gamma, -beta - sgn * sq))
        roots.append(HomPoint(s * p0 + t * p1))
    roots.sort(key=lambda q: tuple(q.v))
    return roots


def _larger(st1, st2):
    return st1 if np.hypot(*st1) >= np.hypot(*st2) else st2


def classify(C: Conic) -> ConicClass:
    """Conic type from the determinant sign and the top-left 2x2 minor."""
    det = float(np.linalg.det(C.m))
    if abs(det) < DEGENERACY_TOL:
        return ConicClass.DEGENERATE
    minor = float(C.m[0, 0] * C.m[1, 1] - C.m[0, 1] ** 2)
    if abs(minor) < _PARABOLA_TOL:
        return ConicClass.PARABOLA
    if minor < 0:
        return ConicClass.HYPERBOLA
    trace = float(C.m[0, 0] + C.m[1, 1])
    return ConicClass.REAL_ELLIPSE if trace * det < 0 else ConicClass.IMAGINARY_ELLIPSE


def dual(C: Conic) -> Conic:
    """Adjugate conic; an involution up to scale on nondegenerate conics."""
    if abs(np.linalg.det(C.m)) < DEGENERACY_TOL:
        raise DegenerateConic("dual of a degenerate conic")
    return Conic(adjugate(C.m))


def pencil_rank(conics: Sequence[Conic], ratio: float = RANK_RATIO) -> tuple[int, float]:
    """Numerical rank of the stacked coefficient 6-vectors and the rank gap.

    The gap is sigma_{rank+1} / sigma_1 (0 when the stack has no further
    singular values); membership in a pencil reads as rank <= 2.
    """
    if len(conics) < 2:
        raise ValueError("pencil rank needs at least two conics")
    rows = np.array([c.vec6 / np.linalg.norm(c.vec6) for c in conics])
    s = np.linalg.svd(rows, compute_uv=False)
    rank = int(np.sum(s > ratio * s[0]))
    gap = float(s[rank] / s[0]) if rank < len(s) else 0.0
    return rank, gap


def fit_conic(points: Sequence[HomPoint]) -> tuple[Conic, float]:
    """Total-least-squares conic through five or more affine points.

    Coordinates are isotropically pre-scaled (centroid at the origin, RMS
    radius sqrt(2)) before the nullspace extraction; the residual is the
    ratio of the smallest to the largest singular value of the scaled
    design matrix.
    """
    if len(points) < 5:
        raise DegenerateInput("conic fit needs at least five points")
    if any(p.is_ideal for p in points):
        raise DegenerateInput("conic fit requires affine points")
    aff = np.array([p.affine() for p in points])
    centroid = aff.mean(axis=0)
    centered = aff - centroid
    rms = np.sqrt((centered ** 2).sum(axis=1).mean())
    if rms == 0.0:
        raise DegenerateInput("all points coincide")
    s = np.sqrt(2.0) / rms
    scaled = centered * s
    design = np.array(
        [
            [x * x, x * y, y * y, x, y, 1.0]
            for x, y in scaled
        ]
    )
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[4] <= RANK_RATIO * sv[0]:
        raise DegenerateInput("points do not determine a unique conic")
    _, _, vt = np.linalg.svd(design)
    n = _matrix_of_vec6(vt[-1])
    t = np.array([[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]])
    return Conic(t.T @ n @ t), float(sv[-1] / sv[0])


def circle(radius: float, center=(0.0, 0.0)) -> Conic:
    cx, cy = center
    return Conic.from_vec6([1.0, 0.0, 1.0, -2 * cx, -2 * cy, cx * cx + cy * cy - radius * radius])


def principal_frame(C: Conic) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Center, principal axes, eigenvalues, and constant of a central conic.

    Returns (center, axes, eigvals, k) with the conic in the form
    sum_i eigvals[i] * u_i^2 = k about its center, axes as columns.
    """
    q = C.m[:2, :2]
    lin = C.m[:2, 2]
    if abs(np.linalg.det(q)) < 1e-14:
        raise DegenerateConic("conic has no affine center")
    center = np.linalg.solve(q, -lin)
    k = -(float(C.m[2, 2]) + float(lin @ center))
    eigvals, axes = np.linalg.eigh(q)
    return center, axes, eigvals, k


def ellipse_axes(C: Conic) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center, axis directions (columns), and semi-axis lengths of an ellipse."""
    if classify(C) is not ConicClass.REAL_ELLIPSE:
        raise DegenerateConic("ellipse frame requested for a non-ellipse")
    center, axes, eigvals, k = principal_frame(C)
    radii = np.sqrt(k / eigvals)
    return center, axes, radii


def ellipse_point(C: Conic, theta: float) -> HomPoint:
    """Point on an ellipse at parameter theta of its principal frame."""
    center, axes, radii = ellipse_axes(C)
    xy = center + axes @ (radii * np.array([np.cos(theta), np.sin(theta)]))
    return HomPoint(xy[0], xy[1])


def transform_conic(M: ProjMap, C: Conic) -> Conic:
    """Pushforward of the conic under the point map M."""
    k = np.linalg.solve(M.m.T, C.m)
    moved = np.linalg.solve(M.m.T, k.T).T
    return Conic(moved)
