"""Desk-scale acceptance checks, shared by the CLI selftest and the test suite.

Each criterion returns a CheckResult; tolerances default to the acceptance
values and can be overridden globally (an over-tight override is expected to
produce clean failures, not crashes).
"""

from __future__ import annotations

import json
import math
import os
import re
import sys
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .confocal import ConfocalFamily, conic_at, ellipse_point_at
from .errors import DegenerateQuad, GeometryError, NonConvexCell
from .generate import generate_scene, lambda_of_inner
from .grid import (
    build_grid,
    concentric_set,
    confocal_grid_check,
    incircle_check,
    iter_cells,
    transform_grid,
    transport_check,
    verify_grid_theorem,
)
from .kasner import commute_check, diagonal_polygon, pencil_remark_check, tangency_polygon
from .poncelet import build_polygon, find_closing_inner, measure_closure, porism_check
from .projective import HomPoint, Polygon, ProjMap
from .render import render_figure
from .scene import SceneDocument

PHI = (1.0 + math.sqrt(5.0)) / 2.0
DIAGONAL_RATIO = 0.3819660112501051     # 1 / phi^2
TANGENCY_RATIO = 0.8090169943749475     # cos 36 degrees
COMPOSED_RATIO = 0.3090169943749474     # cos 36 / phi^2

_START_ANGLE = 0.35
_SKEW = ProjMap([[1.0, 0.3, 0.1], [-0.2, 1.1, 0.0], [0.05, 0.02, 1.0]])


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def random_convex_pentagon(rng: np.random.Generator) -> Polygon:
    """Sorted random angles on a random ellipse of eccentricity <= 0.9.

    Angle gaps below 0.15 rad are rejected to keep the pentagon numerically
    honest (no near-coincident vertices).
    """
    ecc = rng.uniform(0.0, 0.9)
    a = rng.uniform(0.8, 1.6)
    b = a * math.sqrt(1.0 - ecc * ecc)
    rot = rng.uniform(0.0, 2.0 * math.pi)
    cx, cy = rng.uniform(-0.5, 0.5, 2)
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, 5))
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * math.pi]]))
        if gaps.min() > 0.15:
            break
    rotm = np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]])
    pts = (rotm @ np.vstack([a * np.cos(angles), b * np.sin(angles)])).T + [cx, cy]
    return Polygon.from_xy(pts)


class _Fixtures:
    """Lazily built confocal pairs and polygons shared across criteria."""

    def __init__(self):
        self.family = ConfocalFamily(4.0, 1.0)
        self._pairs = {}
        self._polys = {}
        self._grids = {}

    def pair(self, n: int):
        if n not in self._pairs:
            self._pairs[n] = find_closing_inner(self.family, 0.0, n, 1)
        return self._pairs[n]

    def polygon(self, n: int):
        if n not in self._polys:
            start = ellipse_point_at(self.family, 0.0, _START_ANGLE)
            self._polys[n] = build_polygon(self.pair(n), start)
        return self._polys[n]

    def grid(self, n: int):
        if n not in self._grids:
            self._grids[n] = build_grid(self.polygon(n))
        return self._grids[n]


def _check(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except GeometryError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    except AssertionError as exc:
        passed, detail = False, str(exc) or "assertion failed"
    return CheckResult(name, passed, detail, time.perf_counter() - start)


def check_theorem1(fx: _Fixtures, tol: float = 1e-8, seed: int = 0) -> CheckResult:
    def run():
        rng = np.random.default_rng(20260810 + seed)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(200):
            report = commute_check(random_convex_pentagon(rng), 2, tol=max(tol, 1e-6))
            worst = max(worst, report.max_vertex_error)
        elapsed = time.perf_counter() - start
        ok = worst < tol and elapsed < 5.0
        return ok, f"200 pentagons, worst error {worst:.2e} (tol {tol:.0e}), {elapsed:.2f}s"

    return _check("theorem-1 pentagon commutation", run)


def check_theorem2(fx: _Fixtures, tol: float = 1e-8) -> CheckResult:
    def run():
        start = time.perf_counter()
        worst = 0.0
        cases = []
        for n in (7, 9, 11):
            poly = fx.polygon(n)
            for k in range(2, (n + 1) // 2):
                report = commute_check(poly, k, tol=max(tol, 1e-6))
                worst = max(worst, report.max_vertex_error)
                cases.append((n, k))
        elapsed = time.perf_counter() - start
        ok = worst < tol and elapsed < 10.0
        return ok, f"{len(cases)} (n,k) cases, worst error {worst:.2e} (tol {tol:.0e}), {elapsed:.2f}s"

    return _check("theorem-2 Poncelet commutation", run)


def check_porism(fx: _Fixtures, tol: float = 1e-7, seed: int = 0) -> CheckResult:
    def run():
        worst = 0.0
        for n in (7, 9, 11):
            pair = fx.pair(n)
            worst = max(worst, porism_check(pair, samples=20, seed=seed + n))
        pair7 = fx.pair(7)
        lam = lambda_of_inner(fx.family, pair7.inner)
        broken = conic_at(fx.family, lam + 1e-3)
        p0 = ellipse_point_at(fx.family, 0.0, _START_ANGLE)
        control = measure_closure(pair7.outer, broken, 7, p0)
        ok = worst < tol and control > 1e-4
        return ok, f"worst closure {worst:.2e} (tol {tol:.0e}); perturbed control {control:.2e} > 1e-4"

    return _check("Poncelet porism start-independence", run)


def check_grid_theorem(fx: _Fixtures, tol: float = 1e-9) -> CheckResult:
    def run():
        grid = fx.grid(9)
        assert len(grid.points) == 45, f"expected 45 grid points, got {len(grid.points)}"
        report = verify_grid_theorem(grid, tol=max(tol, 1e-9))
        q_res = max(f.residual for f in report.q_fits)
        q_ell = all(f.conic_class.value == "real_ellipse" for f in report.q_fits)
        r_hyp = all(f.conic_class.value == "hyperbola" for f in report.r_fits)
        equiv = float(report.equivalence_residuals.max())
        ok = (
            q_res < tol
            and q_ell
            and len(report.r_fits) == 9
            and r_hyp
            and report.dual_pencil_rank <= 2
            and report.dual_pencil_gap < max(tol, 1e-8)
            and equiv < max(tol, 1e-7)
        )
        return ok, (
            f"45 points; q-res {q_res:.2e} (tol {tol:.0e}); 9 hyperbolas: {r_hyp}; "
            f"dual gap {report.dual_pencil_gap:.2e}; equivalence {equiv:.2e}"
        )

    return _check("grid theorem n=9", run)


def check_confocal_transport(fx: _Fixtures, tol: float = 1e-8) -> CheckResult:
    def run():
        grid = fx.grid(9)
        params = confocal_grid_check(grid, fx.family, tol=tol)
        spread = max(params.q_spreads + params.r_spreads)
        increasing = all(a < b for a, b in zip(params.q_params, params.q_params[1:]))
        in_band = all(-fx.family.a2 < t < -fx.family.b2 for t in params.r_params)
        signs = {}
        worst = 0.0
        for i in range(5):
            for j in range(5):
                sign, err = transport_check(grid, fx.family, i, j, tol=max(tol, 1e-9))
                signs[(i, j)] = sign
                worst = max(worst, err)
        parity = all(
            signs[(i, j)] == signs[(i, 1)] * signs[(1, j)] for i in range(5) for j in range(5)
        )
        ok = spread < tol and increasing and in_band and worst < max(tol, 1e-9) and parity
        return ok, (
            f"spread {spread:.2e} (tol {tol:.0e}); params increasing: {increasing}; "
            f"transport worst {worst:.2e}; parity consistent: {parity}"
        )

    return _check("confocal parameters and transport", run)


def check_pencil_remark(fx: _Fixtures, tol: float = 1e-8) -> CheckResult:
    def run():
        worst = 0.0
        all_pencil = True
        all_control = True
        for n, k in ((7, 3), (9, 2), (9, 3), (9, 4)):
            report = pencil_remark_check(fx.polygon(n), k, tol=tol)
            worst = max(worst, report.rank_gap)
            all_pencil = all_pencil and report.pencil_rank <= 2 and report.rank_gap < tol
            all_control = all_control and report.confocal_rank == 3
        ok = all_pencil and all_control
        return ok, (
            f"worst rank gap {worst:.2e} (tol {tol:.0e}); "
            f"confocal negative control rank 3: {all_control}"
        )

    return _check("pencil remark", run)


def check_incircles(fx: _Fixtures, tol: float = 1e-8) -> CheckResult:
    def run():
        grid = fx.grid(9)
        convex = skipped = 0
        worst = 0.0
        for i, j in iter_cells(9):
            try:
                res = incircle_check(grid, i, j, tol=tol)
            except (NonConvexCell, DegenerateQuad):
                skipped += 1
                continue
            convex += 1
            worst = max(worst, res.max_tangency_error / res.radius)
        skewed = transform_grid(_SKEW, grid)
        control = 0.0
        for i, j in iter_cells(9):
            try:
                res = incircle_check(skewed, i, j, tol=tol)
            except (NonConvexCell, DegenerateQuad):
                continue
            control = max(control, res.max_tangency_error / res.radius)
        ok = convex > 0 and worst < tol and control > 1e-4
        return ok, (
            f"{convex} convex cells, worst relative error {worst:.2e} (tol {tol:.0e}), "
            f"{skipped} skipped; skewed control {control:.2e} > 1e-4"
        )

    return _check("grid-cell incircles", run)


def check_pentagon_oracles(fx: _Fixtures, tol: float = 1e-10) -> CheckResult:
    def run():
        regular = Polygon(
            [
                HomPoint(math.cos(2.0 * math.pi * i / 5.0), math.sin(2.0 * math.pi * i / 5.0))
                for i in range(5)
            ]
        )
        diag = diagonal_polygon(regular, 2)
        tang = tangency_polygon(regular)
        both = tangency_polygon(diag)
        r_d = float(np.linalg.norm(diag.affine, axis=1).mean())
        r_i = float(np.linalg.norm(tang.affine, axis=1).mean())
        r_di = float(np.linalg.norm(both.affine, axis=1).mean())
        errs = (
            abs(r_d - DIAGONAL_RATIO),
            abs(r_i - TANGENCY_RATIO),
            abs(r_di - COMPOSED_RATIO),
        )
        ok = max(errs) < tol
        return ok, (
            f"ratios {r_d:.10f} / {r_i:.10f} / {r_di:.10f}, worst error {max(errs):.1e} "
            f"(tol {tol:.0e})"
        )

    return _check("regular-pentagon scale oracles", run)


_FIGURE_SCENES = {
    "pentagon": dict(n=5, k=2),
    "kasner-nk": dict(n=7, k=3),
    "grid": dict(n=9, k=2),
    "incircles": dict(n=9, k=2),
}


def _count(svg: str, cls: str) -> int:
    return len(re.findall(f'class="{cls}"', svg))


def check_figures(fx: _Fixtures) -> CheckResult:
    def run():
        docs = {}
        for name, spec in _FIGURE_SCENES.items():
            key = (spec["n"], spec["k"])
            if key not in docs:
                docs[key] = generate_scene(n=spec["n"], k=spec["k"], start_angle=_START_ANGLE)
        notes = []
        ok = True
        for name, spec in _FIGURE_SCENES.items():
            doc = docs[(spec["n"], spec["k"])]
            svg = render_figure(doc, name)
            again = render_figure(SceneDocument.from_json_dict(json.loads(doc.dumps())), name)
            deterministic = svg == again
            if name == "pentagon":
                good = _count(svg, "polygon") == 4 and _count(svg, "conic") == 2
            elif name == "kasner-nk":
                good = _count(svg, "polygon") == 4 and _count(svg, "conic") == 3
            elif name == "grid":
                good = (
                    _count(svg, "gridline") == 9
                    and _count(svg, "gridpoint") == 45
                    and _count(svg, "conic") >= 5
                )
            else:
                good = _count(svg, "gridline") == 9 and _count(svg, "incircle") >= 1
            ok = ok and good and deterministic
            notes.append(f"{name}: counts {'ok' if good else 'BAD'}, bytes stable: {deterministic}")
        round_trip = docs[(9, 2)].dumps()
        stable = SceneDocument.from_json_dict(json.loads(round_trip)).dumps() == round_trip
        ok = ok and stable
        notes.append(f"JSON round-trip byte-identical: {stable}")
        return ok, "; ".join(notes)

    return _check("figure rendering", run)


def run_all(tol: Optional[float] = None, seed: int = 0) -> list[CheckResult]:
    """Run the full desk-scale acceptance battery.

    A tol override replaces each criterion's headline tolerance; None keeps
    the per-criterion acceptance values.
    """
    fx = _Fixtures()
    def t(default: float) -> float:
        return default if tol is None else tol

    return [
        check_theorem1(fx, tol=t(1e-8), seed=seed),
        check_theorem2(fx, tol=t(1e-8)),
        check_porism(fx, tol=t(1e-7), seed=seed),
        check_grid_theorem(fx, tol=t(1e-9)),
        check_confocal_transport(fx, tol=t(1e-8)),
        check_pencil_remark(fx, tol=t(1e-8)),
        check_incircles(fx, tol=t(1e-8)),
        check_pentagon_oracles(fx, tol=t(1e-10)),
        check_figures(fx),
    ]


def print_table(results: list[CheckResult], file=None) -> None:
    out = file or sys.stdout
    use_color = hasattr(out, "isatty") and out.isatty() and "NO_COLOR" not in os.environ
    width = max(len(r.name) for r in results)
    for r in results:
        mark = "pass" if r.passed else "FAIL"
        if use_color:
            mark = f"\x1b[32m{mark}\x1b[0m" if r.passed else f"\x1b[31m{mark}\x1b[0m"
        out.write(f"{r.name:<{width}}  {mark}  [{r.seconds:6.2f}s]  {r.detail}\n")
    total = sum(r.seconds for r in results)
    good = sum(1 for r in results if r.passed)
    out.write(f"{good}/{len(results)} criteria passed in {total:.2f}s\n")
