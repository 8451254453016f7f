"""Exception hierarchy for geometric construction and verification failures.

Construction errors (bad or degenerate input) are distinct from verification
failures (a theorem check that did not hold numerically); the CLI maps the
former to exit code 2 and the latter to exit code 1.
"""


class GeometryError(Exception):
    """Base class for all geometric construction errors."""


# -- projective primitives ---------------------------------------------------

class ZeroVector(GeometryError):
    """All three homogeneous components vanish."""


class CoincidentPoints(GeometryError):
    """Two points are scale-equivalent; their join is undefined."""


class CoincidentLines(GeometryError):
    """Two lines are scale-equivalent; their meet is undefined."""


class SingularMap(GeometryError):
    """Projective map matrix is singular or nearly so."""


class DegenerateQuadruple(GeometryError):
    """Four-point correspondence has three nearly collinear points."""


class SizeMismatch(GeometryError):
    """Polygons have different vertex counts."""


# -- conics -------------------------------------------------------------------

class DegenerateInput(GeometryError):
    """Point/line configuration does not determine a unique conic."""


class SingularDual(GeometryError):
    """Adjugate of a fitted dual conic is rank-deficient."""


class DegenerateConic(GeometryError):
    """Conic matrix is rank-deficient where a nondegenerate one is required."""


class PointNotOnConic(GeometryError):
    """Point residual against the conic exceeds tolerance."""


class LineNotTangent(GeometryError):
    """Line is not tangent to the conic within tolerance."""


# -- confocal family ----------------------------------------------------------

class OutOfRange(GeometryError):
    """Family parameter outside its legal interval."""


class NoRealRoot(GeometryError):
    """No legal family member passes through the given point."""


# -- Poncelet dynamics ---------------------------------------------------------

class PointInsideConic(GeometryError):
    """No real tangent lines exist from an interior point."""


class AmbiguousOrientation(GeometryError):
    """Tangency points are not separated enough to pick a direction."""


class BracketFailure(GeometryError):
    """Closure search could not bracket the target rotation number."""


class NoConvergence(GeometryError):
    """Closure search exhausted its iteration budget."""


class ClosureFailure(GeometryError):
    """Chord iteration did not return to its starting point."""


class NotCircumscribed(GeometryError):
    """A polygon side is not tangent to the claimed inscribed conic."""


# -- grid ----------------------------------------------------------------------

class EvenN(GeometryError):
    """Poncelet grid construction requires an odd side count."""


class NearParallelLines(GeometryError):
    """Two grid lines coincide; no intersection point can be stored."""


class IndexOutOfRange(GeometryError):
    """Concentric/radial set index outside its legal range."""


class FitFailure(GeometryError):
    """A grid point set could not be fitted with a conic."""


class NotConfocal(GeometryError):
    """A grid set does not share a single confocal family parameter."""


class NoSignMatches(GeometryError):
    """Neither sign of the transport map matches the target set."""


class DegenerateQuad(GeometryError):
    """Grid cell quadrilateral is degenerate."""


class NonConvexCell(GeometryError):
    """Grid cell quadrilateral is not convex; incircle check skipped."""


# -- Kasner maps ----------------------------------------------------------------

class BadK(GeometryError):
    """Diagonal depth k violates 2 <= k < n/2."""


class DegenerateDiagonals(GeometryError):
    """Consecutive diagonals coincide or meet at infinity."""


class MissingConic(GeometryError):
    """Inscribed conic required but not supplied for n > 5."""


class MatchFailure(GeometryError):
    """No cyclic shift aligns the two polygons within tolerance."""


# -- CLI / documents -------------------------------------------------------------

class MissingLabel(GeometryError):
    """Scene document lacks an object required by the requested figure."""


class SchemaError(GeometryError):
    """Scene document violates the JSON schema."""
