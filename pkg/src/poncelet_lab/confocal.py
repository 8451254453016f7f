"""The confocal family x^2/(a^2+t) + y^2/(b^2+t) = 1 and its transport maps.

Family members are ellipses for t > -b^2 and hyperbolas for -a^2 < t < -b^2.
The transport map between two ellipse members is diagonal and exact; its
overall sign is exposed as an argument because the parity rule that picks it
depends on an index origin convention, so callers try both signs and report
the one that matches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conics import Conic
from .errors import NoRealRoot, OutOfRange
from .projective import HomPoint, ProjMap

_EDGE_EPS = 1e-12


@dataclass(frozen=True)
class ConfocalFamily:
    """Parameters a^2 > b^2 > 0 of the family (both in squared length units)."""

    a2: float
    b2: float

    def __post_init__(self):
        if not (self.a2 > self.b2 > 0.0):
            raise OutOfRange(f"need a2 > b2 > 0, got a2={self.a2}, b2={self.b2}")

    def is_ellipse_param(self, lam: float) -> bool:
        return lam > -self.b2

    def is_hyperbola_param(self, lam: float) -> bool:
        return -self.a2 < lam < -self.b2


def conic_at(family: ConfocalFamily, lam: float) -> Conic:
    """Family member at parameter lam as a Conic."""
    a2, b2 = family.a2, family.b2
    if lam <= -a2 + _EDGE_EPS * a2:
        raise OutOfRange(f"parameter {lam} at or below -a2 = {-a2}")
    if abs(lam + b2) <= _EDGE_EPS * a2:
        raise OutOfRange(f"parameter {lam} at the degenerate member -b2 = {-b2}")
    return Conic(np.diag([1.0 / (a2 + lam), 1.0 / (b2 + lam), -1.0]))


def transport_map(family: ConfocalFamily, lam: float, mu: float, sign: int = 1) -> ProjMap:
    """Diagonal map carrying the lam-ellipse exactly onto the mu-ellipse.

    The sign flips the affine 2x2 block only (a point reflection), keeping
    the third diagonal entry 1 so the map composes with general projective
    machinery.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    a2, b2 = family.a2, family.b2
    for value, name in ((lam, "lam"), (mu, "mu")):
        if not family.is_ellipse_param(value):
            raise OutOfRange(f"{name}={value} is not in the ellipse range (> {-b2})")
    sx = np.sqrt((a2 + mu) / (a2 + lam))
    sy = np.sqrt((b2 + mu) / (b2 + lam))
    return ProjMap(np.diag([sign * sx, sign * sy, 1.0]))


def params_through_point(family: ConfocalFamily, p) -> tuple[float, ...]:
    """Legal family parameters of the members through an affine point.

    Solves the quadratic in t from the family equation and returns the real
    roots inside the legal range, sorted ascending. Generic points with both
    coordinates nonzero yield one ellipse and one hyperbola parameter.
    """
    if isinstance(p, HomPoint):
        x, y = p.affine()
    else:
        x, y = float(p[0]), float(p[1])
    a2, b2 = family.a2, family.b2
    # t^2 + pc t + qc = 0 from x^2 (b2+t) + y^2 (a2+t) = (a2+t)(b2+t)
    pc = a2 + b2 - x * x - y * y
    qc = a2 * b2 - x * x * b2 - y * y * a2
    disc = pc * pc - 4.0 * qc
    if disc < 0.0:
        raise NoRealRoot(f"no real family member through ({x}, {y})")
    sq = np.sqrt(disc)
    if pc >= 0.0:
        r = -(pc + sq) / 2.0
    else:
        r = -(pc - sq) / 2.0
    roots = sorted({r, qc / r} if r != 0.0 else {-pc / 2.0})
    eps = _EDGE_EPS * a2
    legal = [t for t in roots if t > -a2 + eps and abs(t + b2) > eps]
    if not legal:
        raise NoRealRoot(f"only degenerate family members pass through ({x}, {y})")
    return tuple(legal)


def ellipse_point_at(family: ConfocalFamily, lam: float, theta: float) -> HomPoint:
    """Parametric point on the lam-ellipse of the family."""
    if not family.is_ellipse_param(lam):
        raise OutOfRange(f"{lam} is not in the ellipse range")
    return HomPoint(
        np.sqrt(family.a2 + lam) * np.cos(theta),
        np.sqrt(family.b2 + lam) * np.sin(theta),
    )
