"""Command-line interface.

Subcommands: check, potential, scalar, extremal, quad, calabi-csc, sample,
futaki, stab.  Outputs are JSON (reports) or RFC-4180 CSV (grids); the
scalar and sample paths can additionally render a figure with --plot.

Exit codes: 0 success, 1 negative verdict, 2 input error, 3 numerical
failure.  The env var LKQ_SEED overrides the default seed 0.  The polytope
file format is documented in schema/polytope.schema.json: dim, facets
(a0, a, group, index) and groups (id, size); numbers are decimal literals
or exact-rational strings "p/q".
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import calabi as calabi_mod
from . import curvature as curv
from . import levi as levi_mod
from . import polytope as poly
from . import potential as pot
from . import quad as quad_mod
from . import sphere_lab
from .errors import InputError, LkqError, NumericalError, VerdictFailure

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _parse_number(v):
    """Decimal literal, int, or exact-rational string 'p/q'."""
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise InputError(f"not a number: {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    raise InputError(f"not a number: {v!r}")


def load_polytope(path) -> poly.LabelledPolytope:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc
    try:
        dim = int(doc["dim"])
        raw_facets = doc["facets"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed polytope document: {exc}") from exc
    facets = []
    tags = []
    for f in raw_facets:
        a0 = _parse_number(f["a0"])
        a = [_parse_number(v) for v in f["a"]]
        if len(a) != dim:
            raise InputError("facet linear part has wrong length")
        facets.append(poly.AffineFunction(a0, a))
        tags.append((f.get("group"), f.get("index")))
    grouping = None
    if doc.get("groups"):
        order = [g["id"] for g in doc["groups"]]
        sizes = {g["id"]: int(g["size"]) for g in doc["groups"]}
        byg = {}
        for idx, (gid, r) in enumerate(tags):
            if gid is None:
                raise InputError("groups declared but a facet has no group id")
            byg.setdefault(gid, []).append((0 if r is None else r, idx))
        grouping = []
        for gid in order:
            members = sorted(byg.get(gid, []))
            if len(members) != sizes[gid]:
                raise InputError(f"group {gid} has {len(members)} facets, declared {sizes[gid]}")
            grouping.append(tuple(idx for _, idx in members))
    return poly.LabelledPolytope(facets, grouping)


def _seed(args):
    env = os.environ.get("LKQ_SEED")
    if getattr(args, "seed", None) is not None:
        return args.seed
    if env is not None:
        return int(env)
    return 0


def _emit(doc):
    print(json.dumps(doc, indent=2, sort_keys=True, default=float))


def _parse_affine(text, dim):
    vals = [float(Fraction(v)) if "/" in v else float(v) for v in text.split(",")]
    if len(vals) != dim + 1:
        raise InputError(f"affine function needs {dim + 1} comma-separated numbers")
    return poly.AffineFunction(vals[0], vals[1:])


def _auto_w(P):
    w = poly.detect_projective_cube(P)
    if w is None:
        raise InputError("--w auto: no projective-cube pencil function exists")
    return w


def _map_chunks(fn, arr, threads):
    """Partition a pure batch computation across worker threads."""
    if threads <= 1 or len(arr) < 4 * threads:
        return fn(arr)
    import concurrent.futures
    chunks = np.array_split(arr, threads)
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(fn, chunks))
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(args):
    P = load_polytope(args.file)
    out = {"dim": P.dim, "n_facets": P.n_facets, "n_vertices": P.face_lattice().n_vertices}
    out["simple"] = poly.is_simple(P)
    ok = out["simple"]
    if P.grouping is not None:
        out["product_of_simplices"] = poly.matches_product_of_simplices(P)
        ok = ok and out["product_of_simplices"]
        if all(len(g) == 2 for g in P.grouping):
            try:
                w = poly.detect_projective_cube(P)
            except LkqError:
                w = None
            out["projective_cube"] = w is not None
            if w is not None:
                out["w"] = {"a0": float(w.a0), "a": [float(v) for v in w.a]}
        else:
            out["projective_cube"] = False
        setup = levi_mod.setup_from_polytope(P)
        report = levi_mod.is_positive_pair(setup, n=args.n, seed=_seed(args))
        out["positive_pair"] = report.as_dict()
        ok = ok and report.positive
    _emit(out)
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_potential(args):
    P = load_polytope(args.file)
    G = pot.guillemin_potential(P) if args.guillemin else pot.levi_kahler_potential(P)
    mu = np.array([float(Fraction(v)) for v in args.at.split(",")])
    if mu.shape[0] != P.dim:
        raise InputError(f"--at needs {P.dim} coordinates")
    out = {
        "mu": mu.tolist(),
        "G": pot.eval(G, mu),
        "grad": pot.grad(G, mu).tolist(),
        "hess": pot.hess(G, mu).tolist(),
    }
    _emit(out)
    return EXIT_OK


def _csv_writer():
    import csv
    return csv.writer(sys.stdout, lineterminator="\r\n")


def cmd_scalar(args):
    P = load_polytope(args.file)
    G = pot.guillemin_potential(P) if args.guillemin else pot.levi_kahler_potential(P)
    grid = P.interior_grid(args.grid, inset=args.inset)
    if len(grid) == 0:
        raise NumericalError("interior grid is empty; decrease --inset")
    threads = args.threads
    svals = _map_chunks(lambda a: curv.abreu_scalar_batch(G, a), grid, threads)
    w = None
    if args.w is not None:
        w = _auto_w(P) if args.w == "auto" else _parse_affine(args.w, P.dim)
        p = float(P.dim + 2) if args.p in (None, "auto") else float(Fraction(args.p))
        swp = _map_chunks(lambda a: curv.wp_scalar_batch(G, a, w, p), grid, threads)
    writer = _csv_writer()
    header = [f"mu_{i + 1}" for i in range(P.dim)] + ["s"]
    if w is not None:
        header.append("s_wp")
    writer.writerow(header)
    for k in range(len(grid)):
        row = [repr(float(v)) for v in grid[k]] + [repr(float(svals[k]))]
        if w is not None:
            row.append(repr(float(swp[k])))
        writer.writerow(row)
    if args.plot:
        from . import plotting
        plotting.save_scalar_figure(args.plot, P, grid, svals)
    return EXIT_OK


def cmd_extremal(args):
    P = load_polytope(args.file)
    G = pot.levi_kahler_potential(P)
    grid = P.interior_grid(args.grid, inset=args.inset)
    svals = curv.abreu_scalar_batch(G, grid)
    fit = curv.affine_fit(grid, svals)
    out = {"s_fit": fit.as_dict(), "extremal": bool(fit.rel_scale < args.tol)}
    if args.w is not None:
        w = _auto_w(P) if args.w == "auto" else _parse_affine(args.w, P.dim)
        p = float(P.dim + 2) if args.p in (None, "auto") else float(Fraction(args.p))
        swp = curv.wp_scalar_batch(G, grid, w, p)
        wfit = curv.affine_fit(grid, swp)
        out["w"] = {"a0": float(w.a0), "a": [float(v) for v in w.a]}
        out["p"] = p
        out["s_wp_fit"] = wfit.as_dict()
        out["wp_extremal"] = bool(wfit.rel_scale < args.tol)
    _emit(out)
    return EXIT_OK if out["extremal"] else EXIT_VERDICT


def cmd_quad(args):
    Cvals = [Fraction(v) for v in args.C.split(",")]
    cvals = [Fraction(v) for v in args.c.split(",")]
    if len(Cvals) != 4 or len(cvals) != 2:
        raise InputError("--C needs alpha,gamma,beta,delta and --c needs c1,c2")
    qd = quad_mod.QuadData(((Cvals[0], Cvals[1]), (Cvals[2], Cvals[3])), cvals)
    tag = quad_mod.classify(qd)
    report = quad_mod.extremal_check(qd)
    out = {"classification": tag.as_dict(), "extremal_report": report.as_dict(),
           "vertices": quad_mod.corner_vertices(qd).tolist()}
    _emit(out)
    return EXIT_OK if report.extremal else EXIT_VERDICT


def cmd_calabi_csc(args):
    beta = Fraction(args.beta)
    eta = Fraction(args.eta)
    if args.c is None and args.s is None:
        raise InputError("give --c or --s")
    if args.c is not None:
        c = Fraction(args.c)
        s = 2 * c * (3 * eta * eta - 2 * beta * eta - 1) if args.s is None else Fraction(args.s)
    else:
        s = Fraction(args.s)
        denom = 2 * (3 * eta * eta - 2 * beta * eta - 1)
        if denom == 0:
            raise InputError("degenerate parameters: 3 eta^2 - 2 beta eta - 1 = 0")
        c = s / denom
    data = calabi_mod.HFKGData(beta, eta, c)
    report = calabi_mod.csc_certify(data, base_scal=s, n_grid=args.n_grid,
                                    seed=_seed(args))
    out = {"beta": str(beta), "eta": str(eta), "c": str(c), "s": str(s),
           "report": report.as_dict()}
    _emit(out)
    return EXIT_OK


def cmd_sample(args):
    P = load_polytope(args.file)
    if P.grouping is None:
        raise InputError("sample needs a grouped polytope (declare groups in the file)")
    batch = sphere_lab.sample(P.grouping, args.n, _seed(args))
    report = sphere_lab.moment_image_test(P, batch=batch, check=False)
    _emit(report.as_dict())
    if args.plot:
        setup = levi_mod.setup_from_polytope(P)
        mus = levi_mod.moment_batch(batch.points, setup)
        from . import plotting
        plotting.save_sample_figure(args.plot, P, mus)
    return EXIT_OK if report.passed else EXIT_VERDICT


def cmd_futaki(args):
    P = load_polytope(args.file)
    G = pot.guillemin_potential(P) if args.guillemin else pot.levi_kahler_potential(P)
    w = _auto_w(P) if args.w == "auto" else _parse_affine(args.w, P.dim)
    p = float(P.dim + 2) if args.p in (None, "auto") else float(Fraction(args.p))
    h = _parse_affine(args.h, P.dim)
    value = curv.futaki(P, P.grouping, G, w, p, h, n_quad=args.n_quad, seed=_seed(args))
    _emit({"futaki": value, "p": p, "n_quad": args.n_quad,
           "potential": "guillemin" if args.guillemin else "levi-kahler"})
    return EXIT_OK


def cmd_stab(args):
    P = load_polytope(args.file)
    face = [int(v) for v in args.face.split(",")]
    order = poly.stabilizer_order(P, face)
    _emit({"face": face, "stabilizer_order": order})
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="lkq",
        description="Toric Kahler metrics from quotients of products of odd "
                    "spheres: construction, curvature, and verification.",
        epilog="Momentum chart convention: a polytope facet is the affine "
               "function a0 + <a, mu> on R^m; the first chart coordinate of "
               "the ambient space of labels is the constant term. Numbers in "
               "JSON inputs may be decimals or exact 'p/q' strings.")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker threads for batch sweeps (default 1)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="simplicity, grouping match, cube detection, positivity")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=10000, help="positivity samples")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("potential", help="G, grad G, Hess G at a point")
    p.add_argument("file")
    p.add_argument("--guillemin", action="store_true")
    p.add_argument("--at", required=True, help="comma-separated interior point")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("scalar", help="CSV grid of scalar curvature (and s_wp)")
    p.add_argument("file")
    p.add_argument("--grid", type=int, default=12, help="grid points per dimension")
    p.add_argument("--inset", type=float, default=0.05)
    p.add_argument("--guillemin", action="store_true")
    p.add_argument("--w", help="'auto' or comma-separated a0,a1,..")
    p.add_argument("--p", help="'auto' (= m+2) or a number")
    p.add_argument("--plot", help="also render a figure to this file")
    p.set_defaults(func=cmd_scalar)

    p = sub.add_parser("extremal", help="affine-fit verdict for s (and s_wp)")
    p.add_argument("file")
    p.add_argument("--grid", type=int, default=12)
    p.add_argument("--inset", type=float, default=0.06)
    p.add_argument("--w", help="'auto' or comma-separated a0,a1,..")
    p.add_argument("--p", help="'auto' (= m+2) or a number")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("quad", help="S3xS3 quotient: classification + extremality")
    p.add_argument("--C", required=True, help="alpha,gamma,beta,delta")
    p.add_argument("--c", required=True, help="c1,c2")
    p.set_defaults(func=cmd_quad)

    p = sub.add_parser("calabi-csc", help="certify a CSC member of the fibred family")
    p.add_argument("--beta", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--c")
    p.add_argument("--s")
    p.add_argument("--n-grid", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_calabi_csc)

    p = sub.add_parser("sample", help="moment-image containment and coverage")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--seed", type=int)
    p.add_argument("--plot", help="also render a figure to this file")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("futaki", help="generalized Futaki invariant")
    p.add_argument("file")
    p.add_argument("--w", required=True, help="'auto' or a0,a1,..")
    p.add_argument("--p", help="'auto' (= m+2) or a number")
    p.add_argument("--h", required=True, help="hamiltonian affine function a0,a1,..")
    p.add_argument("--n-quad", type=int, default=100000)
    p.add_argument("--guillemin", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_futaki)

    p = sub.add_parser("stab", help="orbifold stabilizer order of a face")
    p.add_argument("file")
    p.add_argument("--face", required=True, help="comma-separated facet indices")
    p.set_defaults(func=cmd_stab)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerdictFailure as exc:
        if getattr(exc, "report", None) is not None:
            _emit(exc.report.as_dict())
        print(f"verdict: {exc}", file=sys.stderr)
        return EXIT_VERDICT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LkqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
