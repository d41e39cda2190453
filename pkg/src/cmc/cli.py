"""Command line interface: ``cmc <subcommand> ...``.

Exit codes: 0 on success, 1 when validation fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .complex import check_compatible_orientation, validate
from .forman import NonSimpleCellError, forman_subdivide
from .geometry.catalog import catalog_names, catalog_problem
from .geometry.embedding import QUAD_POINTS
from .geometry.generators import (gen_cube_mesh, gen_hemisphere_mesh, gen_polar_disk_mesh,
                                  gen_rect_mesh)
from .geometry.tess import import_tess, tess_mesh, voronoi_rectangle, write_tess
from .io import (MeshFormatError, load_mesh, load_problem, load_result, save_embedded_mesh,
                 save_mesh, save_problem, save_result)
from .solvers import TransientSettings, relative_errors, solve
from .validation import check_problem

log = logging.getLogger("cmc")

MESH_KINDS = ("cube", "rectangle", "disk", "hemisphere", "voronoi")


class UsageError(Exception):
    """Inconsistent command line flags."""


class ValidationFailure(Exception):
    """Input data failed a structural check."""


# ------------------------------------------------------------------ parser
def _mesh_flags(p):
    g = p.add_argument_group("mesh parameters")
    g.add_argument("--nx", type=int)
    g.add_argument("--ny", type=int)
    g.add_argument("--nz", type=int)
    g.add_argument("--nr", type=int)
    g.add_argument("--nphi", type=int)
    g.add_argument("--ntheta", type=int)
    g.add_argument("--w", type=float)
    g.add_argument("--h", type=float)
    g.add_argument("--cells", type=int, default=10, help="Voronoi cell count")
    g.add_argument("--seed", type=int, default=0, help="Voronoi seed")


def build_parser():
    parser = argparse.ArgumentParser(prog="cmc", description="Combinatorial mesh calculus "
                                     "transport solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a mesh")
    p.add_argument("kind", choices=MESH_KINDS)
    _mesh_flags(p)
    p.add_argument("-o", "--output", required=True, help="cmc-mesh JSON file")
    p.add_argument("--tess", help="also write the Voronoi tessellation as .tess")

    p = sub.add_parser("forman", help="Forman subdivision of a mesh file")
    p.add_argument("mesh")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("validate", help="structural checks of a mesh file")
    p.add_argument("mesh")

    p = sub.add_parser("discretize", help="catalog problem to a problem file")
    p.add_argument("problem", choices=catalog_names())
    _mesh_flags(p)
    p.add_argument("--tess", help="use this .tess tessellation as the mesh")
    p.add_argument("--voronoi", action="store_true",
                   help="use a generated Voronoi tessellation (rectangle only)")
    p.add_argument("--source-points", type=int, default=QUAD_POINTS,
                   help="Gauss points per axis for the source term (1 = midpoint)")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("problem")
    p.add_argument("--formulation", choices=("primal", "mixed"), default="primal")
    p.add_argument("--regime", choices=("steady", "transient"), default="steady")
    p.add_argument("--method", choices=("eliminate", "saddle"), default="eliminate")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("render", help="SVG (2D) or VTK (3D) figure of a result")
    p.add_argument("result")
    p.add_argument("--problem", required=True, help="problem file the result belongs to")
    p.add_argument("--frames", action="store_true", help="one numbered file per time step")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=640)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("repro", help="error table of the four catalog examples")
    p.add_argument("--source-points", type=int, default=1)
    p.add_argument("--cube-n", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    return parser


# ------------------------------------------------------------------ helpers
def _params(args, names):
    return {k: getattr(args, k) for k in names if getattr(args, k, None) is not None}


def _make_mesh(kind, args):
    if kind == "cube":
        kw = _params(args, ("nx", "ny", "nz"))
        kw.setdefault("nx", 2)
        return gen_cube_mesh(**kw)
    if kind == "rectangle":
        kw = {"w": 20.0, "h": 15.0, "nx": 4, "ny": 3}
        kw.update(_params(args, ("w", "h", "nx", "ny")))
        return gen_rect_mesh(**kw)
    if kind == "disk":
        kw = {"nr": 4, "nphi": 3}
        kw.update(_params(args, ("nr", "nphi")))
        return gen_polar_disk_mesh(**kw)
    if kind == "hemisphere":
        kw = {"ntheta": 6, "nphi": 6}
        kw.update(_params(args, ("ntheta", "nphi")))
        return gen_hemisphere_mesh(**kw)
    w, h = args.w or 20.0, args.h or 15.0
    return tess_mesh(voronoi_rectangle(args.cells, w, h, seed=args.seed), "voronoi",
                     {"w": w, "h": h})


def _parent_coordinates(mesh):
    if hasattr(mesh, "parent_points"):
        return mesh.parent_points
    lo = mesh.parent_boxes[0][0]
    return mesh.chart.to_cartesian(lo)


def _report(report, compatible):
    lines = [f"{kind}: {cell}" for kind, cell in report.violations()]
    lines += [f"orientation: {cell}" for cell in compatible]
    return lines


# --------------------------------------------------------------- commands
def cmd_gen(args):
    mesh = _make_mesh(args.kind, args)
    save_mesh(args.output, mesh.parent, _parent_coordinates(mesh))
    if args.tess:
        if args.kind != "voronoi":
            raise UsageError("--tess is only available for voronoi meshes")
        w, h = args.w or 20.0, args.h or 15.0
        write_tess(voronoi_rectangle(args.cells, w, h, seed=args.seed), args.tess)
    print(f"{args.kind}: counts {list(mesh.parent.counts)} -> {args.output}")


def cmd_forman(args):
    mf = load_mesh(args.mesh)
    try:
        K = forman_subdivide(mf.complex)
    except NonSimpleCellError as exc:
        raise ValidationFailure(str(exc)) from None
    coords = None
    if mf.coordinates is not None:
        # a Forman node [c, c] sits at the mean of the vertices of c
        cn = [None] + [mf.complex.cell_nodes(p) for p in range(1, mf.complex.dim + 1)]
        coords = np.array([mf.coordinates[lo] if ld == 0 else
                           mf.coordinates[cn[ld][lo]].mean(axis=0)
                           for ld, lo, _, _ in K.intervals[0]])
    save_mesh(args.output, K.complex, coords, None, K.intervals)
    print(f"forman: counts {list(K.complex.counts)} -> {args.output}")


def cmd_validate(args):
    mf = load_mesh(args.mesh, normalize=False)
    report = validate(mf.complex)
    ok, bad = check_compatible_orientation(mf.complex) if report.ok else (True, [])
    if report.ok and ok:
        print(f"{args.mesh}: valid, counts {list(mf.complex.counts)}")
        return
    for line in _report(report, bad):
        print(line, file=sys.stderr)
    raise ValidationFailure(f"{args.mesh}: {len(report.violations()) + len(bad)} violation(s)")


def cmd_discretize(args):
    if (args.dt is None) != (args.steps is None):
        raise UsageError("--dt and --steps must be given together")
    if args.tess and args.voronoi:
        raise UsageError("--tess and --voronoi are mutually exclusive")
    mesh = None
    if args.tess:
        mesh = import_tess(args.tess)
    elif args.voronoi:
        mesh = _make_mesh("voronoi", args)
    if mesh is None:
        kind = args.problem.split("-")[0]
        mesh = _make_mesh(kind, args)
    problem, u_ex, q_ex = catalog_problem(args.problem, mesh=mesh,
                                          source_points=args.source_points)
    if args.dt is not None:
        problem.transient = TransientSettings(args.dt, args.steps, args.theta)
    out = Path(args.output)
    mesh_path = out.with_name(out.stem + ".mesh.json")
    save_embedded_mesh(mesh_path, mesh)
    save_problem(out, problem, mesh_path.name, exact=(u_ex, q_ex))
    print(f"{args.problem}: counts {list(mesh.complex.counts)} -> {out}, {mesh_path}")


def cmd_solve(args):
    pf = load_problem(args.problem)
    problem = pf.problem
    if args.regime == "transient":
        ts = problem.transient
        if ts is None and (args.dt is None or args.steps is None):
            raise UsageError("transient solves need --dt and --steps or a transient problem")
        base = ts or TransientSettings(args.dt, args.steps)
        problem.transient = TransientSettings(
            args.dt or base.dt, base.steps if args.steps is None else args.steps,
            base.theta if args.theta is None else args.theta, base.t0, base.u0)
    try:
        check_problem(problem, args.regime)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from None
    result = solve(problem, args.formulation, args.regime, args.method)
    errors = None
    if pf.exact_u is not None and pf.exact_q is not None:
        errors = relative_errors(result, pf.exact_u, pf.exact_q)
        print(f"u_rel = {errors.u_rel:.6g}")
        print(f"q_rel = {errors.q_rel:.6g}")
    save_result(args.output, result, errors)
    print(f"{args.formulation} {args.regime} -> {args.output}")


def cmd_render(args):
    from .viz import RenderSpec, render_svg, render_vtk

    pf = load_problem(args.problem)
    result, _ = load_result(args.result)
    cx = pf.mesh.complex
    coords = pf.mesh.coordinates
    if coords is None:
        raise ValidationFailure("the mesh file has no node coordinates")
    out = Path(args.output)
    want = ".svg" if cx.dim == 2 else ".vtk"
    if cx.dim not in (2, 3):
        raise UsageError("only 2D (SVG) and 3D (VTK) meshes can be rendered")
    if out.suffix != want:
        raise UsageError(f"a {cx.dim}D mesh renders to {want}, not {out.suffix or 'no suffix'}")
    if len(result.u) != cx.counts[0] or len(result.q) != cx.counts[cx.dim - 1]:
        raise ValidationFailure("result does not match the problem mesh")

    def draw(u, q):
        if cx.dim == 2:
            return render_svg(cx, coords, u, q, RenderSpec(width=args.width, height=args.height))
        return render_vtk(cx, coords, u, q)

    if args.frames:
        if result.series_u is None:
            raise UsageError("--frames needs a transient result")
        for k, (u, q) in enumerate(zip(result.series_u, result.series_q)):
            out.with_name(f"{out.stem}_{k:04d}{out.suffix}").write_text(draw(u, q))
        print(f"{len(result.series_u)} frames -> {out.with_name(out.stem + '_*' + out.suffix)}")
    else:
        out.write_text(draw(result.u, result.q))
        print(f"figure -> {out}")


def cmd_repro(args):
    from .repro import format_table, reproduce

    print(format_table(reproduce(args.source_points, args.cube_n, seed=args.seed)))


COMMANDS = {"gen": cmd_gen, "forman": cmd_forman, "validate": cmd_validate,
            "discretize": cmd_discretize, "solve": cmd_solve, "render": cmd_render,
            "repro": cmd_repro}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"cmc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"cmc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValidationFailure, MeshFormatError) as exc:
        print(f"cmc {args.command}: validation failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
