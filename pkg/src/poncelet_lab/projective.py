"""Homogeneous-coordinate primitives: points, lines, projective maps, polygons.

All values are immutable after construction and every operation is a pure
function, so everything here is safe to use concurrently.

Scale canonicalization divides by the component of largest absolute value
(not by w), so ideal points are first-class values rather than errors.
Tolerances are relative to the geometric diameter of the configuration.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    CoincidentLines,
    CoincidentPoints,
    DegenerateQuadruple,
    SingularMap,
    SizeMismatch,
    ZeroVector,
)

DEFAULT_TOL = 1e-9
_COINCIDENCE_TOL = 1e-12
_IDEAL_TOL = 1e-12


def _canonical3(values) -> np.ndarray:
    v = np.array(values, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ZeroVector("homogeneous components must be finite")
    idx = int(np.argmax(np.abs(v)))
    scale = v[idx]
    if scale == 0.0:
        raise ZeroVector("all three homogeneous components are zero")
    out = v / scale
    out.setflags(write=False)
    return out


class HomPoint:
    """Projective point (x : y : w), stored scale-canonically.

    Affine points have w != 0; ideal points (w == 0) are legal values.
    """

    __slots__ = ("v",)

    def __init__(self, x, y=None, w=None):
        if y is None:
            object.__setattr__(self, "v", _canonical3(x))
        else:
            object.__setattr__(self, "v", _canonical3((x, y, 1.0 if w is None else w)))

    def __setattr__(self, name, value):
        raise AttributeError("HomPoint is immutable")

    @property
    def x(self) -> float:
        return float(self.v[0])

    @property
    def y(self) -> float:
        return float(self.v[1])

    @property
    def w(self) -> float:
        return float(self.v[2])

    @property
    def is_ideal(self) -> bool:
        return abs(self.v[2]) < _IDEAL_TOL

    def affine(self) -> np.ndarray:
        """Return (x/w, y/w); raises for ideal points."""
        if self.is_ideal:
            raise ZeroVector("ideal point has no affine form")
        return np.array([self.v[0] / self.v[2], self.v[1] / self.v[2]])

    def __eq__(self, other) -> bool:
        return isinstance(other, HomPoint) and bool(np.allclose(self.v, other.v, atol=1e-12))

    def __repr__(self) -> str:
        return f"HomPoint({self.v[0]:.6g}, {self.v[1]:.6g}, {self.v[2]:.6g})"


class HomLine:
    """Projective line a x + b y + c w = 0, stored scale-canonically."""

    __slots__ = ("v",)

    def __init__(self, a, b=None, c=None):
        if b is None:
            object.__setattr__(self, "v", _canonical3(a))
        else:
            object.__setattr__(self, "v", _canonical3((a, b, c)))

    def __setattr__(self, name, value):
        raise AttributeError("HomLine is immutable")

    @property
    def coeffs(self) -> np.ndarray:
        return self.v

    def __eq__(self, other) -> bool:
        return isinstance(other, HomLine) and bool(np.allclose(self.v, other.v, atol=1e-12))

    def __repr__(self) -> str:
        return f"HomLine({self.v[0]:.6g}, {self.v[1]:.6g}, {self.v[2]:.6g})"


def normalize(v):
    """Return the canonical scale representative (largest-|component| = 1)."""
    if isinstance(v, (HomPoint, HomLine)):
        return type(v)(v.v)
    raise TypeError(f"cannot normalize {type(v).__name__}")


def join(p: HomPoint, q: HomPoint) -> HomLine:
    """Line through two distinct points."""
    c = np.cross(p.v, q.v)
    if np.linalg.norm(c) <= _COINCIDENCE_TOL * np.linalg.norm(p.v) * np.linalg.norm(q.v):
        raise CoincidentPoints(f"join of scale-equivalent points {p} and {q}")
    return HomLine(c)


def meet(l: HomLine, m: HomLine) -> HomPoint:
    """Intersection of two distinct lines; parallels yield an ideal point."""
    c = np.cross(l.v, m.v)
    if np.linalg.norm(c) <= _COINCIDENCE_TOL * np.linalg.norm(l.v) * np.linalg.norm(m.v):
        raise CoincidentLines(f"meet of scale-equivalent lines {l} and {m}")
    return HomPoint(c)


def incidence_residual(p: HomPoint, l: HomLine) -> float:
    """Scale-free incidence residual |l . p| / (|l| |p|)."""
    return abs(float(p.v @ l.v)) / (np.linalg.norm(p.v) * np.linalg.norm(l.v))


class ProjMap:
    """Invertible projective map of the plane, a 3x3 matrix up to scale."""

    __slots__ = ("m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(m)):
            raise SingularMap("map matrix must be finite")
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= 1e-12 * s[0]:
            raise SingularMap("map matrix is singular or nearly so")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __setattr__(self, name, value):
        raise AttributeError("ProjMap is immutable")

    def __matmul__(self, other: "ProjMap") -> "ProjMap":
        return ProjMap(self.m @ other.m)

    def inverse(self) -> "ProjMap":
        return ProjMap(np.linalg.inv(self.m))

    @staticmethod
    def identity() -> "ProjMap":
        return ProjMap(np.eye(3))

    def scaled(self) -> np.ndarray:
        """Canonical matrix: unit Frobenius norm, largest-|entry| positive."""
        m = self.m / np.linalg.norm(self.m)
        flat = np.abs(m).argmax()
        if m.flat[flat] < 0:
            m = -m
        return m

    def __repr__(self) -> str:
        return f"ProjMap({self.m.tolist()})"


def apply_point(M: ProjMap, p: HomPoint) -> HomPoint:
    return HomPoint(M.m @ p.v)


def apply_line(M: ProjMap, l: HomLine) -> HomLine:
    """Inverse-transpose action, so incidence is preserved."""
    return HomLine(np.linalg.solve(M.m.T, l.v))


def _frame_matrix(quad: Sequence[HomPoint]) -> np.ndarray:
    """Matrix sending the standard projective frame to the quadruple."""
    basis = np.column_stack([p.v for p in quad[:3]])
    s = np.linalg.svd(basis, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise DegenerateQuadruple("three of the four points are nearly collinear")
    coeff = np.linalg.solve(basis, quad[3].v)
    if np.min(np.abs(coeff)) <= 1e-10 * np.max(np.abs(coeff)):
        raise DegenerateQuadruple("fourth point nearly collinear with two others")
    return basis * coeff


def map_from_correspondence(src: Sequence[HomPoint], dst: Sequence[HomPoint]) -> ProjMap:
    """Unique projective map sending four source points to four targets.

    Both quadruples must be in general position (no three collinear).
    """
    if len(src) != 4 or len(dst) != 4:
        raise DegenerateQuadruple("exactly four source and four target points required")
    m = _frame_matrix(dst) @ np.linalg.inv(_frame_matrix(src))
    out = ProjMap(m)
    for p, q in zip(src, dst):
        image = out.m @ p.v
        residual = np.linalg.norm(np.cross(image, q.v)) / (
            np.linalg.norm(image) * np.linalg.norm(q.v)
        )
        if residual > 1e-9:
            raise DegenerateQuadruple(f"ill-conditioned correspondence, residual {residual:.2e}")
    return out


class Polygon:
    """Cyclically ordered list of n >= 3 affine points; indices are mod n."""

    __slots__ = ("vertices", "_affine")

    def __init__(self, vertices: Sequence[HomPoint]):
        verts = tuple(vertices)
        if len(verts) < 3:
            raise ValueError("polygon needs at least three vertices")
        for v in verts:
            if not isinstance(v, HomPoint):
                raise TypeError("polygon vertices must be HomPoint")
            if v.is_ideal:
                raise ValueError("polygon vertices must be affine (w != 0)")
        aff = np.array([v.affine() for v in verts])
        aff.setflags(write=False)
        diam = _diameter(aff)
        if diam <= 0.0:
            raise ValueError("polygon vertices all coincide")
        n = len(verts)
        for i in range(n):
            if np.linalg.norm(aff[i] - aff[(i + 1) % n]) < 1e-10 * diam:
                raise ValueError(f"consecutive vertices {i} and {(i + 1) % n} coincide")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_affine", aff)

    def __setattr__(self, name, value):
        raise AttributeError("Polygon is immutable")

    @classmethod
    def from_xy(cls, coords) -> "Polygon":
        return cls([HomPoint(x, y) for x, y in np.asarray(coords, dtype=float)])

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def affine(self) -> np.ndarray:
        return self._affine

    def vertex(self, i: int) -> HomPoint:
        return self.vertices[i % self.n]

    def diameter(self) -> float:
        return _diameter(self._affine)

    def centroid(self) -> np.ndarray:
        return self._affine.mean(axis=0)

    def side_lines(self) -> list[HomLine]:
        """Extended side lines join(V_i, V_{i+1})."""
        return [join(self.vertex(i), self.vertex(i + 1)) for i in range(self.n)]

    def __repr__(self) -> str:
        return f"Polygon(n={self.n})"


def _diameter(aff: np.ndarray) -> float:
    diff = aff[:, None, :] - aff[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2)).max())


def apply_to_polygon(M: ProjMap, poly: Polygon) -> Polygon:
    return Polygon([apply_point(M, v) for v in poly.vertices])


class CyclicMatch(NamedTuple):
    """Result of aligning two labeled vertex cycles.

    error is the max vertex distance relative to the first polygon's diameter;
    orientation is +1 when the second cycle was taken as given, -1 reversed.
    """

    shift: int
    orientation: int
    error: float


def cyclic_match(a: Polygon, b: Polygon, tol: float = DEFAULT_TOL) -> Optional[CyclicMatch]:
    """Smallest cyclic shift aligning b to a within tol * diam(a).

    Scans the direct orientation first (orientation-preserving preferred),
    then the reversed one. Returns None when no shift qualifies.
    """
    if a.n != b.n:
        raise SizeMismatch(f"vertex counts differ: {a.n} vs {b.n}")
    n = a.n
    diam = a.diameter()
    fa = a.affine
    for orientation, fb in ((1, b.affine), (-1, b.affine[::-1])):
        for s in range(n):
            err = float(np.linalg.norm(fa - np.roll(fb, -s, axis=0), axis=1).max())
            if err < tol * diam:
                return CyclicMatch(shift=s, orientation=orientation, error=err / diam)
    return None
