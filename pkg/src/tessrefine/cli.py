"""``tessrefine`` command line.

Exit codes: 0 on success (whatever the mathematical verdict), 2 on usage
errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .figures import refinability_scene, render_svg, scene, voronoi_scene, PRESETS
from .geometry import GeometryError
from .lattices import (LatticeName, UnsupportedDimension, classify, closed_form_inner_product,
                       make_lattice, obtuse_inner_product)
from .projector import NumericalFailure, error_vs_level, project
from .refinability import (CriterionReport, PieceIdentificationFailed, PreconditionViolated, Verdict,
                           efficiency_test, facet_union_test, family_hyperplane_test,
                           hyperplane_extension_test, obtuse_reflection_test, overlap_criterion_test,
                           step_infeasibility_certificate)
from .splines import (SpacingTooCoarse, cell_and_lattice, cell_spline, partition_of_unity_error,
                      spline_refinability_residual, support_diameter, write_pgm)
from .tessellation import (FAMILY_OFFSETS, ScaledCopy, TessellationFamily, as_family,
                           family_preset, load_spec, preset)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fraction(text) -> Fraction:
    try:
        f = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None
    if f <= 0:
        raise UsageError("value must be positive")
    return f


def _load_tess(text):
    if text.startswith("file:"):
        return load_spec(text[5:])
    if text in ("square", "hex", "triangle"):
        return preset(text)
    if text in FAMILY_OFFSETS:
        return family_preset(text)
    raise UsageError(f"unknown tessellation {text!r}")


def _load_family(text) -> TessellationFamily:
    if text in FAMILY_OFFSETS or text in ("square", "hex", "triangle"):
        return family_preset(text)
    path = text[5:] if text.startswith("file:") else text
    if not Path(path).exists():
        raise UsageError(f"unknown family {text!r}")
    return as_family(load_spec(path))


def _report(args, argv, body):
    out = {"command": list(argv), "version": __version__}
    out.update(body)
    return out


def _emit(report, path):
    text = dumps(report)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------

def cmd_lattice(args, argv):
    spec = make_lattice(args.name, args.n)
    rep = obtuse_inner_product(spec)
    closed = closed_form_inner_product(spec.name, spec.n)
    body = {"inputs": {"name": spec.name.value, "n": spec.n},
            "lattice": spec.to_json(), **rep.to_json(),
            "closed_form": closed, "closed_form_verdict": classify(closed).value,
            "closed_form_match": bool(abs(closed - rep.inner_product) <= 1e-9)}
    return _report(args, argv, body)


def cmd_voronoi(args, argv):
    from .voronoi import abutting_obtuse_pairs, voronoi_cell
    spec = make_lattice(args.name, args.n)
    if args.svg and spec.n != 2:
        raise UsageError("--svg needs a 2D lattice")
    cell = voronoi_cell(spec)
    body = {"inputs": {"name": spec.name.value, "n": spec.n}, "num_facets": cell.num_facets,
            "det": spec.det, "cell": cell.to_json(),
            "obtuse_pairs": [{"facets": list(ij), "inner_product": ip}
                             for ij, ip in abutting_obtuse_pairs(cell)]}
    if spec.n <= 3:
        body["volume"] = cell.volume()
    if args.svg:
        render_svg(voronoi_scene(cell), args.svg)
    return _report(args, argv, body)


def _safe(fn, *a, **kw) -> CriterionReport:
    try:
        return fn(*a, **kw)
    except PreconditionViolated as e:
        name = fn.__name__.replace("_criterion_test", "").replace("_test", "").replace("_", "-")
        return CriterionReport(name, Verdict.INCONCLUSIVE, details={"reason": str(e)})


# efficiency is a precondition of the overlap test, not a refinability verdict
_BLOCKING = {"facet-union", "hyperplane-extension", "obtuse-reflection", "family-hyperplane", "overlap"}


def cmd_refinability(args, argv):
    scale = _fraction(args.scale)
    if scale >= 1:
        raise UsageError("scale must be below 1")
    tess = _load_tess(args.tess)
    fam = _load_family(args.family) if args.family else (tess if isinstance(tess, TessellationFamily) else None)
    body = {"inputs": {"tess": args.tess, "scale": str(scale), "family": args.family}}
    reports = []
    if fam is None:
        fine = ScaledCopy(tess, scale)
        reports.append(facet_union_test(tess, fine))
        reports.append(hyperplane_extension_test(tess))
        reports.append(obtuse_reflection_test(tess))
    else:
        reports.append(efficiency_test(fam))
        reports.append(family_hyperplane_test(fam))
        reports.append(_safe(overlap_criterion_test, fam))
        try:
            cert = step_infeasibility_certificate(fam, fam.scaled(float(scale)))
            body["certificate"] = cert.to_json()
        except PieceIdentificationFailed as e:
            body["certificate"] = {"applicable": False, "error": str(e)}
    body["criteria"] = [r.to_json() for r in reports]
    failed = any(r.failed and r.criterion in _BLOCKING for r in reports)
    body["overall"] = "non-refinable-with-witness" if failed else "refinable-not-excluded"
    if args.svg:
        base = fam.base if fam is not None else tess
        fine_t = ScaledCopy(base, scale).tessellation
        render_svg(refinability_scene(base, fine_t, reports), args.svg)
    return _report(args, argv, body)


def cmd_project(args, argv):
    scale = _fraction(args.scale)
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    tess = _load_tess(args.tess)
    fam = as_family(tess)
    results = error_vs_level(fam, args.levels, scale=scale)
    body = {"inputs": {"tess": args.tess, "scale": str(scale), "levels": args.levels},
            "levels": [{"level": i, "squared_residual": r.squared_residual, "l2_error": r.l2_error,
                        "relative_l2": r.relative_l2, "gram_condition": r.gram_condition, "rank": r.rank}
                       for i, r in enumerate(results)],
            "errors": [r.l2_error for r in results]}
    if args.levels >= 2:
        target = fam.base.reference_cells()[0]
        lvl1 = project(target, fam.scaled(float(scale), fam.base.offset))
        body["level1"] = lvl1.to_json()
    return _report(args, argv, body)


def cmd_spline(args, argv):
    h = float(_fraction(args.h))
    if args.order < 1:
        raise UsageError("--order must be >= 1")
    cell, _ = cell_and_lattice(args.cell)
    f = cell_spline(cell, args.order, h)
    c = cell.centroid
    body = {"inputs": {"cell": args.cell, "order": args.order, "h": args.h},
            "integral": f.integral(), "value_at_centre": float(f.evaluate([c])[0]),
            "support_diameter": support_diameter(f),
            "partition_of_unity_error": partition_of_unity_error(args.cell, args.order, h),
            "grid_shape": list(f.shape)}
    if args.order <= 3:
        body["refinability_residual"] = spline_refinability_residual(args.order, h, args.cell)
    if args.pgm:
        write_pgm(f, args.pgm)
    return _report(args, argv, body)


def cmd_render(args, argv):
    if args.preset not in PRESETS:
        raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(sorted(PRESETS))}")
    s = scene(args.preset)
    render_svg(s, args.svg)
    return None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tessrefine", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    lat = sub.add_parser("lattice", help="neighbor-pair inner product of a catalogued lattice")
    lsub = lat.add_subparsers(dest="action", required=True)
    chk = lsub.add_parser("check")
    chk.add_argument("name", choices=[n.value for n in LatticeName])
    chk.add_argument("n", type=int)
    chk.add_argument("--json")
    chk.set_defaults(func=cmd_lattice)

    vor = sub.add_parser("voronoi", help="Voronoi cell of a catalogued lattice")
    vor.add_argument("name", choices=[n.value for n in LatticeName])
    vor.add_argument("n", type=int)
    vor.add_argument("--svg")
    vor.add_argument("--json")
    vor.set_defaults(func=cmd_voronoi)

    ref = sub.add_parser("refinability", help="run the refinability criteria")
    ref.add_argument("--tess", required=True, help="square | hex | triangle | <family preset> | file:SPEC.json")
    ref.add_argument("--scale", default="1/2")
    ref.add_argument("--family", help="family preset name or spec file")
    ref.add_argument("--json")
    ref.add_argument("--svg")
    ref.set_defaults(func=cmd_refinability)

    pro = sub.add_parser("project", help="least-squares error per refinement level")
    pro.add_argument("--tess", required=True)
    pro.add_argument("--levels", type=int, default=2)
    pro.add_argument("--scale", default="1/2")
    pro.add_argument("--json")
    pro.set_defaults(func=cmd_project)

    spl = sub.add_parser("spline", help="grid metrics of a convolved cell spline")
    spl.add_argument("--cell", choices=["hex", "square"], default="hex")
    spl.add_argument("--order", type=int, default=1)
    spl.add_argument("--h", default="1/64")
    spl.add_argument("--json")
    spl.add_argument("--pgm")
    spl.set_defaults(func=cmd_spline)

    ren = sub.add_parser("render", help="write a preset figure as SVG")
    ren.add_argument("--preset", required=True)
    ren.add_argument("--svg", required=True)
    ren.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        report = args.func(args, argv)
    except (UsageError, UnsupportedDimension, GeometryError, SpacingTooCoarse, ValueError,
            FileNotFoundError, KeyError, json.JSONDecodeError) as e:
        print(f"tessrefine: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, np.linalg.LinAlgError) as e:
        print(f"tessrefine: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    if report is not None:
        _emit(report, getattr(args, "json", None))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
