"""Command-line front end: generate, verify, render, selftest.

Exit codes: 0 = verified / success, 1 = a theorem check failed numerically,
2 = invalid input or construction failure. The two failure kinds are never
conflated.
"""

from __future__ import annotations

import argparse
import sys

from .confocal import ConfocalFamily, ellipse_point_at
from .errors import (
    DegenerateQuad,
    GeometryError,
    MatchFailure,
    NonConvexCell,
    NoSignMatches,
    NotConfocal,
)
from .generate import DEFAULT_START_ANGLE, generate_scene
from .grid import (
    build_grid,
    confocal_grid_check,
    incircle_check,
    iter_cells,
    transport_check,
    verify_grid_theorem,
)
from .kasner import commute_check, pencil_remark_check
from .poncelet import build_polygon, find_closing_inner, porism_check
from .render import FIGURES, render_figure
from .scene import (
    SceneDocument,
    canonical_dumps,
    family_from_metadata,
    pair_from_document,
    polygon_from_document,
)
from .selftest import print_table, run_all

_VERIFY_FAILURES = (MatchFailure, NoSignMatches, NotConfocal)


def _add_generation_flags(parser: argparse.ArgumentParser, n_default: int) -> None:
    parser.add_argument("--a2", type=float, default=4.0, help="major semi-axis squared (default 4)")
    parser.add_argument("--b2", type=float, default=1.0, help="minor semi-axis squared (default 1)")
    parser.add_argument("--lambda-outer", type=float, default=0.0, dest="lambda_outer")
    parser.add_argument("--n", type=int, default=n_default)
    parser.add_argument("--winding", type=int, default=1)
    parser.add_argument("--start-angle", type=float, default=DEFAULT_START_ANGLE, dest="start_angle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poncelet-lab",
        description="Poncelet polygons, diagonal maps, grids, and their numeric certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a scene document")
    _add_generation_flags(gen, n_default=7)
    gen.add_argument("--k", type=int, default=2, help="diagonal depth for the commutation objects")
    gen.add_argument("--tol", type=float, default=1e-12, help="closure tolerance for the pair search")
    gen.add_argument("--out", required=True, help="output JSON path")
    gen.set_defaults(func=cmd_gen)

    verify = sub.add_parser("verify", help="run a theorem verifier")
    verify.add_argument(
        "check", choices=["kasner", "grid", "porism", "pencil", "incircles", "transport"]
    )
    verify.add_argument("--in", dest="infile", help="scene document (otherwise generated)")
    _add_generation_flags(verify, n_default=0)
    verify.add_argument("--k", type=int, default=None)
    verify.add_argument("--tol", type=float, default=None, help="verification tolerance")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--samples", type=int, default=20)
    verify.add_argument("--json", dest="json_out", help="write the machine report to this path")
    verify.set_defaults(func=cmd_verify)

    render = sub.add_parser("render", help="render a figure from a scene document")
    render.add_argument("--in", dest="infile", required=True)
    render.add_argument("--figure", required=True, choices=sorted(FIGURES))
    render.add_argument("--out", required=True, help="output SVG path")
    render.set_defaults(func=cmd_render)

    selftest = sub.add_parser("selftest", help="run the acceptance battery at desk scale")
    selftest.add_argument("--tol", type=float, default=None, help="override every headline tolerance")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.set_defaults(func=cmd_selftest)

    return parser


def cmd_gen(args) -> int:
    doc = generate_scene(
        a2=args.a2,
        b2=args.b2,
        lam_outer=args.lambda_outer,
        n=args.n,
        winding=args.winding,
        k=args.k,
        start_angle=args.start_angle,
        tol=args.tol,
    )
    doc.save(args.out)
    meta = doc.metadata
    print(
        f"wrote {args.out}: n={meta['n']} winding={meta['winding']} "
        f"lambda_inner={meta['lambda_inner']:.9f} closure={meta['closure_error']:.3e}"
    )
    return 0


def _resolve(args):
    """Scene from --in, or a freshly generated confocal configuration."""
    if args.infile:
        doc = SceneDocument.load(args.infile)
        family = family_from_metadata(doc.metadata)
        pair = pair_from_document(doc)
        poly = polygon_from_document(doc)
        return family, pair, poly
    defaults = {"kasner": 7, "grid": 9, "porism": 7, "pencil": 7, "incircles": 9, "transport": 9}
    n = args.n if args.n else defaults[args.check]
    family = ConfocalFamily(args.a2, args.b2)
    pair = find_closing_inner(family, args.lambda_outer, n, args.winding)
    poly = build_polygon(pair, ellipse_point_at(family, args.lambda_outer, args.start_angle))
    return family, pair, poly


def _emit_report(args, report: dict) -> None:
    if args.json_out:
        with open(args.json_out, "w") as handle:
            handle.write(canonical_dumps(report))


def cmd_verify(args) -> int:
    family, pair, poly = _resolve(args)
    handler = {
        "kasner": _verify_kasner,
        "grid": _verify_grid,
        "porism": _verify_porism,
        "pencil": _verify_pencil,
        "incircles": _verify_incircles,
        "transport": _verify_transport,
    }[args.check]
    try:
        passed, report = handler(args, family, pair, poly)
    except _VERIFY_FAILURES as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        _emit_report(args, {"check": args.check, "passed": False, "error": str(exc)})
        return 1
    report["check"] = args.check
    report["passed"] = passed
    _emit_report(args, report)
    return 0 if passed else 1


def _verify_kasner(args, family, pair, poly):
    k = args.k if args.k is not None else 2
    tol = args.tol if args.tol is not None else 1e-8
    report = commute_check(poly, k, tol=tol)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"kasner commutation n={report.n} k={report.k}: max vertex error "
        f"{report.max_vertex_error:.3e} (tol {tol:.0e}), shift {report.shift}, "
        f"orientation {report.orientation:+d} -> {status}"
    )
    return report.passed, report.to_dict()


def _verify_grid(args, family, pair, poly):
    tol = args.tol if args.tol is not None else 1e-7
    grid = build_grid(poly)
    report = verify_grid_theorem(grid, tol=tol)
    print(f"grid n={grid.n}: {len(grid.points)} points")
    for fit in report.q_fits:
        print(f"  Q_{fit.k}: {fit.conic_class.value}, fit residual {fit.residual:.2e}")
    classes = {f.conic_class.value for f in report.r_fits}
    print(f"  radial sets: {len(report.r_fits)} fits, classes {sorted(classes)}")
    print(
        f"  dual pencil rank {report.dual_pencil_rank} (gap {report.dual_pencil_gap:.2e}); "
        f"equivalence worst {report.equivalence_residuals.max():.2e}; "
        f"Q0 vs inner gap {report.q0_inner_gap:.2e}"
    )
    print("PASS" if report.passed else "FAIL")
    return report.passed, report.to_dict()


def _verify_porism(args, family, pair, poly):
    tol = args.tol if args.tol is not None else 1e-7
    worst = porism_check(pair, samples=args.samples, seed=args.seed)
    passed = worst < tol
    print(
        f"porism n={pair.n}: worst closure over {args.samples} starts "
        f"{worst:.3e} (tol {tol:.0e}) -> {'PASS' if passed else 'FAIL'}"
    )
    return passed, {
        "n": pair.n,
        "samples": args.samples,
        "seed": args.seed,
        "max_closure_error": worst,
        "tol": tol,
    }


def _verify_pencil(args, family, pair, poly):
    k = args.k if args.k is not None else 3
    tol = args.tol if args.tol is not None else 1e-8
    report = pencil_remark_check(poly, k, tol=tol)
    passed = report.passed and report.confocal_rank == 3
    print(
        f"pencil remark n={pair.n} k={k}: rank gap {report.rank_gap:.3e} (tol {tol:.0e}); "
        f"confocal control rank {report.confocal_rank} -> {'PASS' if passed else 'FAIL'}"
    )
    return passed, report.to_dict()


def _verify_incircles(args, family, pair, poly):
    tol = args.tol if args.tol is not None else 1e-8
    grid = build_grid(poly)
    cells = []
    convex = skipped = failed = 0
    worst = 0.0
    for i, j in iter_cells(grid.n):
        try:
            res = incircle_check(grid, i, j, tol=tol)
        except (NonConvexCell, DegenerateQuad) as exc:
            skipped += 1
            cells.append({"i": i, "j": j, "status": type(exc).__name__})
            continue
        convex += 1
        rel = res.max_tangency_error / res.radius
        worst = max(worst, rel)
        if not res.passed:
            failed += 1
        cells.append(
            {
                "i": i,
                "j": j,
                "status": "convex",
                "radius": res.radius,
                "relative_error": rel,
            }
        )
    passed = convex > 0 and failed == 0
    print(
        f"incircles n={grid.n}: {convex} convex cells, worst relative error {worst:.3e} "
        f"(tol {tol:.0e}), {skipped} skipped -> {'PASS' if passed else 'FAIL'}"
    )
    return passed, {"n": grid.n, "tol": tol, "worst_relative_error": worst, "cells": cells}


def _verify_transport(args, family, pair, poly):
    tol = args.tol if args.tol is not None else 1e-9
    grid = build_grid(poly)
    half = (grid.n + 1) // 2
    confocal_grid_check(grid, family)
    signs = {}
    worst = 0.0
    for i in range(half):
        for j in range(half):
            sign, err = transport_check(grid, family, i, j, tol=tol)
            signs[(i, j)] = sign
            worst = max(worst, err)
    parity = all(
        signs[(i, j)] == signs[(i, 1)] * signs[(1, j)] for i in range(half) for j in range(half)
    )
    passed = parity and worst < tol
    print(
        f"transport n={grid.n}: worst match error {worst:.3e} (tol {tol:.0e}); "
        f"sign composition consistent: {parity} -> {'PASS' if passed else 'FAIL'}"
    )
    return passed, {
        "n": grid.n,
        "tol": tol,
        "worst_error": worst,
        "parity_consistent": parity,
        "signs": {f"{i}->{j}": s for (i, j), s in signs.items()},
    }


def cmd_render(args) -> int:
    doc = SceneDocument.load(args.infile)
    svg = render_figure(doc, args.figure)
    with open(args.out, "w") as handle:
        handle.write(svg)
    print(f"wrote {args.out}")
    return 0


def cmd_selftest(args) -> int:
    results = run_all(tol=args.tol, seed=args.seed)
    print_table(results)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VERIFY_FAILURES as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except (GeometryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
