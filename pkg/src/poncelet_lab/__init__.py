"""Poncelet polygons, diagonal maps, Poncelet grids, and their verification."""

from .confocal import ConfocalFamily, conic_at, ellipse_point_at, params_through_point, transport_map
from .conics import (
    Conic,
    ConicClass,
    circle,
    classify,
    conic_tangent_to_lines,
    conic_through_points,
    dual,
    ellipse_axes,
    fit_conic,
    intersect_conic_line,
    pencil_rank,
    tangency_point,
    tangent_line_at,
    transform_conic,
)
from .grid import (
    ConfocalGridParams,
    GridReport,
    IncircleResult,
    PonceletGrid,
    build_grid,
    concentric_set,
    confocal_grid_check,
    incircle_check,
    iter_cells,
    radial_set,
    transform_grid,
    transport_check,
    verify_grid_theorem,
)
from .kasner import (
    CommutationReport,
    OrbitRecord,
    PencilRemarkReport,
    commute_check,
    diagonal_polygon,
    inscribed_conic,
    iterate_map,
    outer_tangent_intersections,
    pencil_remark_check,
    tangency_polygon,
)
from .poncelet import (
    PonceletPair,
    PonceletPolygon,
    assemble_polygon,
    build_polygon,
    chord_step,
    find_closing_inner,
    measure_closure,
    porism_check,
    rotation_number,
    tangent_lines_from,
)
from .projective import (
    CyclicMatch,
    HomLine,
    HomPoint,
    Polygon,
    ProjMap,
    apply_line,
    apply_point,
    apply_to_polygon,
    cyclic_match,
    incidence_residual,
    join,
    map_from_correspondence,
    meet,
    normalize,
)

__version__ = "0.1.0"
