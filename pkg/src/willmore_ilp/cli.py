"""Command line front end: dictionary -> constraints -> solve -> report."""

from __future__ import annotations

import argparse
import sys

from .constraints import BoundaryError, build_oriented_system
from .experiments import LADDER, build_instance_lp, run_rung
from .formats import (FormatError, MeshFile, export_lp_file, read_mesh, read_triplets, write_mesh, write_obj,
                      write_triplets)
from .geometry import INTEGRANDS, DegenerateHingeError, NonManifoldEdgeError, mesh_energy
from .instance import InstanceFile, load_instance
from .instances import square_loop
from .lattice import EmptyDictionaryError, LatticeSpec, generate_dictionary, write_dictionary
from .solver import Status, ilp_solve, lp_solve, round_check
from .tu import build_table1_matrix, search_eulerian_violation, verify_certificate


class CliError(Exception):
    pass


def _box(text):
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("box needs three integers, e.g. 2,2,1")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad box {text!r}") from None


def _open_out(path):
    if path is None or str(path) == "-":
        return sys.stdout
    return open(path, "w")


def _emit(path, write):
    fh = _open_out(path)
    try:
        write(fh)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _instance(args) -> InstanceFile:
    """Instance file (if given) with command line flags layered on top."""
    if getattr(args, "instance", None):
        inst = load_instance(args.instance)
    else:
        res = args.resolution or 1
        box = args.box or (res, res, 1)
        side = min(box[0], box[1])
        inst = InstanceFile(LatticeSpec(res, box), square_loop(side, 0), ["in"], source="flags")
    lat = inst.lattice
    if args.resolution is not None or args.box is not None or args.max_edge is not None:
        lat = LatticeSpec(args.resolution or lat.resolution_n, args.box or lat.bounding_box,
                          args.max_edge if args.max_edge is not None else lat.max_edge_len)
    inst.lattice = lat
    if getattr(args, "phi", None):
        if args.phi == "table" and inst.table is None:
            raise CliError("--phi table needs an instance file with a weight table")
        inst.phi = args.phi
    opts = inst.solver
    for key in ("tol_int", "node_limit", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(opts, key, val)
    return inst


def _lp_for(inst):
    d, problem = inst.build()
    system, lp = build_instance_lp(d, problem, inst.phi, inst.table, inst.solver)
    return d, system, lp


def cmd_gen_dict(args):
    inst = _instance(args)
    d = generate_dictionary(inst.lattice)
    _emit(args.output, lambda fh: write_dictionary(d, fh))
    print(f"triangles: {d.n_triangles} edges: {d.n_edges} vertices: {d.n_vertices}", file=sys.stderr)
    return 0


def cmd_build(args):
    inst = _instance(args)
    d, problem = inst.build()
    if args.form == "B":
        system = build_oriented_system(d, problem)
    else:
        system, lp = build_instance_lp(d, problem, inst.phi, inst.table, inst.solver)
        if args.export_lp:
            export_lp_file(lp, args.export_lp, integer=args.integer)
    _emit(args.output, lambda fh: write_triplets(system.matrix, fh))
    m, n = system.shape
    print(f"form: {system.kind.value} rows: {m} cols: {n} nnz: {system.matrix.nnz} "
          f"fixed_ones: {len(system.fixed_ones)} fixed_zeros: {len(system.fixed_zeros)}",
          file=sys.stderr)
    return 0


def _solve(args, integer):
    inst = _instance(args)
    d, system, lp = _lp_for(inst)
    if args.export_lp:
        export_lp_file(lp, args.export_lp, integer=integer)
    opts = inst.solver
    if integer:
        rep = ilp_solve(lp, node_limit=opts.node_limit, tol_int=opts.tol_int, max_iter=opts.max_iter)
    else:
        rep = lp_solve(lp, max_iter=opts.max_iter)
        if rep.x is not None:
            rep.fractional_vars = round_check(rep, opts.tol_int).fractional
    text = rep.to_text()
    if args.no_timing:
        text = "".join(line for line in text.splitlines(True) if not line.startswith("wall_time:"))
    _emit(args.report, lambda fh: fh.write(text))
    if rep.x is not None:
        mesh = MeshFile.from_solution(d, rep.x, tol=opts.tol_int)
        if args.mesh_out:
            _emit(args.mesh_out, lambda fh: write_mesh(mesh, fh))
        if args.obj_out:
            _emit(args.obj_out, lambda fh: write_obj(mesh, fh))
    return 0 if rep.status is Status.OPTIMAL else 2


def cmd_solve_lp(args):
    return _solve(args, integer=False)


def cmd_solve_ilp(args):
    return _solve(args, integer=True)


def cmd_check_tu(args):
    if args.matrix:
        with open(args.matrix) as fh:
            try:
                matrix = read_triplets(fh)
            except FormatError as exc:
                raise FormatError(exc.message, exc.lineno, args.matrix) from None
    else:
        inst = _instance(args)
        d, problem = inst.build()
        if args.form == "B":
            matrix = build_oriented_system(d, problem).matrix
        else:
            matrix = build_instance_lp(d, problem, inst.phi, inst.table, inst.solver)[0].matrix
    seed = args.seed if args.seed is not None else 0
    res = search_eulerian_violation(matrix, max_size=args.max_size, budget=args.budget, seed=seed)
    m, n = matrix.shape
    print(f"shape: {m}x{n}")
    print(f"method: {res.method}")
    print(f"examined: {res.examined}")
    if res.found:
        check = verify_certificate(matrix, res.certificate)
        print(f"size: {len(res.certificate.row_ids)}")
        print(f"sum: {check.sum}")
        print("verdict: NOT totally unimodular")
        if args.cert_out:
            _emit(args.cert_out, lambda fh: fh.write(res.certificate.to_text()))
        return 0
    if res.exhausted:
        print("verdict: totally unimodular")
    else:
        print("verdict: NOT_FOUND (inconclusive)")
        for note in res.notes:
            print(f"note: {note}")
    return 0


def cmd_energy(args):
    with open(args.mesh) as fh:
        try:
            mesh = read_mesh(fh)
        except FormatError as exc:
            raise FormatError(exc.message, exc.lineno, args.mesh) from None
    if args.phi not in INTEGRANDS:
        raise CliError(f"--phi must be one of {', '.join(INTEGRANDS)} for a mesh file")
    d, ids = mesh.to_dictionary()
    value = mesh_energy(ids, d, INTEGRANDS[args.phi])
    print(f"energy: {value!r}")
    if args.obj_out:
        _emit(args.obj_out, lambda fh: write_obj(mesh, fh))
    return 0


def cmd_export_lp(args):
    inst = _instance(args)
    _, _, lp = _lp_for(inst)
    path = export_lp_file(lp, args.path, integer=args.integer)
    m, n = lp.shape
    print(f"wrote {path} ({m} rows, {n} columns, {lp.A.nnz} nonzeros)")
    return 0


def cmd_repro_table1(args):
    t = build_table1_matrix(pad=True)
    cert = t.certificate()
    check = verify_certificate(t.matrix, cert)
    m, n = t.matrix.shape
    print(f"shape: {m}x{n}")
    if args.show:
        print("      " + " ".join(f"{c:>7s}" for c in t.col_labels))
        for label, row in zip(t.row_labels, t.matrix):
            print(f"{label:>9s} " + " ".join(f"{v:>7d}" for v in row))
    print(f"Eulerian = {str(check.is_eulerian).lower()}")
    print(f"sum = {check.sum}")
    print(f"divisible_by_four = {str(check.divisible_by_four).lower()}")
    print("verdict: " + ("NOT totally unimodular" if check.refutes_tu else "inconclusive"))
    return 0 if check.refutes_tu else 1


def cmd_ladder(args):
    ok = True
    for rung in LADDER:
        r = run_rung(rung, tol_int=args.tol_int or 1e-7, node_limit=args.node_limit or 100_000)
        print(r.line() + ("" if r.sandwich_ok else "  SANDWICH VIOLATED"))
        ok &= r.sandwich_ok
    return 0 if ok else 1


def _add_lattice(p, instance=True):
    if instance:
        p.add_argument("instance", nargs="?", help="instance file; flags override its values")
    p.add_argument("--resolution", type=int)
    p.add_argument("--box", type=_box, help="lattice extents in units of 1/resolution, e.g. 2,2,1")
    p.add_argument("--max-edge", type=float, help="longest admissible edge in lattice units")
    p.add_argument("--phi", choices=sorted(INTEGRANDS) + ["table"])
    p.add_argument("--tol-int", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--node-limit", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="willmore-ilp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dict", help="write the triangle dictionary")
    _add_lattice(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_dict)

    p = sub.add_parser("build", help="write the constraint matrix as triplets")
    _add_lattice(p)
    p.add_argument("--form", choices=["B", "D"], default="D")
    p.add_argument("-o", "--output")
    p.add_argument("--export-lp", metavar="PATH")
    p.add_argument("--integer", action="store_true", help="binary markers in the exported file")
    p.set_defaults(func=cmd_build)

    for name, func in (("solve-lp", cmd_solve_lp), ("solve-ilp", cmd_solve_ilp)):
        p = sub.add_parser(name, help="solve the " + ("relaxation" if name == "solve-lp" else "integer program"))
        _add_lattice(p)
        p.add_argument("--report", metavar="PATH", help="report file (default stdout)")
        p.add_argument("--export-lp", metavar="PATH")
        p.add_argument("--mesh-out", metavar="PATH")
        p.add_argument("--obj-out", metavar="PATH", help="support as a Wavefront OBJ file")
        p.add_argument("--no-timing", action="store_true", help="omit wall_time from the report")
        p.set_defaults(func=func)

    p = sub.add_parser("check-tu", help="search for an Eulerian submatrix with sum 2 mod 4")
    _add_lattice(p)
    p.add_argument("--matrix", metavar="PATH", help="triplet file instead of a built system")
    p.add_argument("--form", choices=["B", "D"], default="D")
    p.add_argument("--max-size", type=int, default=6)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--cert-out", metavar="PATH")
    p.set_defaults(func=cmd_check_tu)

    p = sub.add_parser("energy", help="energy of a mesh file")
    p.add_argument("mesh")
    p.add_argument("--phi", default="willmore")
    p.add_argument("--obj-out", metavar="PATH")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("export-lp", help="write the relaxation (or ILP) in MPS format")
    _add_lattice(p)
    p.add_argument("path")
    p.add_argument("--integer", action="store_true")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("repro-table1", help="build and verify the non-TU counterexample")
    p.add_argument("--show", action="store_true", help="print the matrix")
    p.set_defaults(func=cmd_repro_table1)

    p = sub.add_parser("ladder", help="resolution ladder: LP, fractional count, ILP")
    p.add_argument("--tol-int", type=float)
    p.add_argument("--node-limit", type=int)
    p.set_defaults(func=cmd_ladder)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CliError, BoundaryError, EmptyDictionaryError, DegenerateHingeError,
            NonManifoldEdgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
