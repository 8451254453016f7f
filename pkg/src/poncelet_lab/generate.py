"""Scene generation: confocal Poncelet pair, polygon, commutation objects, grid."""

from __future__ import annotations

from .confocal import ConfocalFamily, ellipse_point_at
from .conics import fit_conic
from .grid import build_grid, concentric_set
from .kasner import _conic_tangent_to_all, diagonal_lines, diagonal_polygon, tangency_polygon
from .poncelet import build_polygon, find_closing_inner
from .scene import SceneDocument, conic_to_list, points_to_list, polygon_to_list

DEFAULT_START_ANGLE = 0.35


def lambda_of_inner(family: ConfocalFamily, inner) -> float:
    """Recover the family parameter of a confocal member from its matrix."""
    m = inner.m
    return -m[2, 2] / m[0, 0] - family.a2


def generate_scene(
    a2: float = 4.0,
    b2: float = 1.0,
    lam_outer: float = 0.0,
    n: int = 7,
    winding: int = 1,
    k: int = 2,
    start_angle: float = DEFAULT_START_ANGLE,
    tol: float = 1e-12,
) -> SceneDocument:
    """Build the full scene document for one confocal Poncelet configuration.

    Contains the pair, the polygon P and its commutation objects D, I, ID,
    and (for odd n) the grid points with per-set fitted conics.
    """
    family = ConfocalFamily(a2, b2)
    pair = find_closing_inner(family, lam_outer, n, winding, tol=tol)
    poly = build_polygon(pair, ellipse_point_at(family, lam_outer, start_angle))

    base = poly.polygon
    diag = diagonal_polygon(base, k)
    diag_caustic = _conic_tangent_to_all(diagonal_lines(base, k), 1e-7)
    tangency = tangency_polygon(base, pair.inner)
    commuted = tangency_polygon(diag, diag_caustic)

    doc = SceneDocument(
        metadata={
            "a2": a2,
            "b2": b2,
            "lambda_outer": lam_outer,
            "lambda_inner": lambda_of_inner(family, pair.inner),
            "n": n,
            "winding": winding,
            "k": k,
            "start_angle": start_angle,
            "tol": tol,
            "closure_error": pair.closure_error,
            "provenance": "poncelet-lab gen",
        },
        conics={
            "outer": conic_to_list(pair.outer),
            "inner": conic_to_list(pair.inner),
            "diag_caustic": conic_to_list(diag_caustic),
        },
        polygons={
            "P": polygon_to_list(base),
            "D": polygon_to_list(diag),
            "I": polygon_to_list(tangency),
            "ID": polygon_to_list(commuted),
        },
    )

    if n % 2 == 1:
        grid = build_grid(poly)
        affine_pts = [p for p in grid.points.values() if not p.is_ideal]
        doc.points["grid"] = sorted(points_to_list(affine_pts))
        for kk in range((n + 1) // 2):
            members = [p for p in concentric_set(grid, kk) if not p.is_ideal]
            doc.points[f"Q{kk}"] = points_to_list(members)
            conic, _ = fit_conic(members)
            doc.conics[f"Q{kk}_fit"] = conic_to_list(conic)
        doc.metadata["ideal_grid_points"] = len(grid.ideal_pairs)

    doc.validate()
    return doc
