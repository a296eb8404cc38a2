"""Command-line front end.

Exit status: 0 success (or verdict true), 1 verdict false, 2 usage or input
error, 3 truncation budget exceeded, 4 internal error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import acceptance
from .cocycle import (growth_bound_check, haagerup_profile, measured_profile, optimal_profile,
                      projected_norm_sq, recurrence_residual, virtual_potentials)
from .edgespace import chi, divergence_at
from .exceptions import (AddressError, DomainError, KernelParseError, ParameterError,
                         ResourceError, TreeCocycleError, ValidationError)
from .formats import (cnd_report_to_json, dumps_csv, dumps_json, format_real, projection_to_json,
                      read_kernel)
from .green import green_value, neumann_partial, project, q_chi_norm_sq
from .kernels import cnd_check, invariance_defect, valette_kernel
from .tree import ROOT, RegularTree, format_vertex, path_vertex

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_RESOURCE, EXIT_INTERNAL = 0, 1, 2, 3, 4


class UsageError(TreeCocycleError):
    pass


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _q(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("q must be >= 2")
    return v


def _radius(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("radius must be >= 1")
    return v


def _common(radius_default, radius_help):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--q", type=_q, default=2, help="branching parameter (degree q+1)")
    p.add_argument("--tol", type=_positive_float, default=1e-10, help="truncation tolerance on squared norms")
    p.add_argument("--radius", type=_radius, default=radius_default, help=radius_help)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    return p


def _table(args, header, rows, meta=None):
    if args.format == "json":
        doc = dict(meta or {})
        doc["rows"] = [dict(zip(header, r)) for r in rows]
        return dumps_json(doc)
    return dumps_csv(header, rows)


# -- subcommands -----------------------------------------------------------------------
def cmd_green(args, tree):
    x, y = tree.parse(args.x), tree.parse(args.y)
    closed = green_value(tree, x, y)
    exact = green_value(tree, x, y, exact=True)
    d = tree.distance(x, y)
    if max(tree.distance(ROOT, x), tree.distance(ROOT, y)) > args.radius:
        raise DomainError(f"x and y must lie in ball(root, {args.radius})")
    steps = sorted({n for n in (0, 1, 2, 5, 10, 20, 40, 60, 100, 200, args.steps) if n <= args.steps})
    rows = []
    for n in steps:
        s = neumann_partial(tree, x, y, n, args.radius)
        rows.append([n, s, closed - s])
    meta = {"q": tree.q, "x": format_vertex(x), "y": format_vertex(y), "distance": d,
            "radius": args.radius, "green_value": closed, "green_value_exact": str(exact)}
    if args.format == "json":
        return _table(args, ["N", "partial_sum", "gap"], rows, meta), EXIT_OK
    lines = [f"# {k}={v}" for k, v in meta.items() if k != "green_value"]
    lines.insert(5, f"# green_value={format_real(closed, 12)}")
    return "\n".join(lines) + "\n" + dumps_csv(["N", "partial_sum", "gap"], rows), EXIT_OK


def cmd_profile(args, tree):
    if args.n_max < 1:
        raise ParameterError("--n-max must be >= 1")
    if args.kind == "projected":
        prof = measured_profile(tree, args.n_max, args.tol, max_radius=args.radius)
        closed = [projected_norm_sq(tree, n) for n in range(args.n_max + 1)]
    elif args.kind == "haagerup":
        prof = haagerup_profile(tree, args.n_max)
        closed = [float(n) for n in range(args.n_max + 1)]
    else:
        w = (tree.q - 1) / (tree.q + 1) if args.w is None else args.w
        prof = optimal_profile(tree, args.n_max, w)
        closed = list(prof.values)
    rows = []
    for row in growth_bound_check(prof):
        n = row.n
        res = recurrence_residual(prof, n) if 1 <= n <= prof.n_max - 1 else None
        rows.append([n, row.phi, closed[n], row.bound, row.slack, res])
    meta = {"q": tree.q, "kind": args.kind, "tol": args.tol}
    return _table(args, ["n", "phi", "closed_form", "bound", "slack", "residual"], rows, meta), EXIT_OK


def cmd_project(args, tree):
    x, y = tree.parse(args.x), tree.parse(args.y)
    res = project(chi(tree, x, y), args.tol, max_radius=args.radius)
    d = tree.distance(x, y)
    summary = [
        ["distance", d],
        ["gradient_norm_sq", res.gradient_part.norm_sq()],
        ["gradient_norm_sq_closed_form", q_chi_norm_sq(tree, d)],
        ["harmonic_norm_sq", res.harmonic_part.norm_sq()],
        ["harmonic_norm_sq_closed_form", d - q_chi_norm_sq(tree, d)],
        ["tail_bound", res.tail_bound],
        ["support_radius", res.support_radius],
    ]
    if args.format == "json":
        doc = {"q": tree.q, "x": format_vertex(x), "y": format_vertex(y), "tol": args.tol}
        doc.update({k: v for k, v in summary})
        doc["result"] = projection_to_json(res)
        return dumps_json(doc), EXIT_OK
    return dumps_csv(["quantity", "value"], summary), EXIT_OK


def cmd_potentials(args, tree):
    pot = virtual_potentials(tree, args.radius)
    rows = []
    for k in range(args.radius):
        s, t = path_vertex(tree, k), path_vertex(tree, k + 1)
        rows.append([k, format_vertex(s), format_vertex(t), pot.f.value(s, t), pot.f_prime.value(s, t),
                     pot.f_tilde.value(s, t), divergence_at(pot.f, s), divergence_at(pot.f_tilde, s)])
    meta = {"q": tree.q, "support_radius": args.radius, "tail_bound": pot.tail_bound}
    header = ["k", "source", "target", "f", "f_prime", "f_tilde", "div_f_at_source", "div_f_tilde_at_source"]
    return _table(args, header, rows, meta), EXIT_OK


def cmd_kernel_check(args, tree):
    if args.file == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    fmt = "json" if args.file.endswith(".json") else ("csv" if args.file.endswith(".csv") else None)
    K = read_kernel(tree, text, fmt)
    rep = cnd_check(K, args.tol)
    status = EXIT_OK if rep.is_cnd else EXIT_FALSE
    if args.format == "json":
        doc = {"points": [format_vertex(p) for p in K.points]}
        doc.update(cnd_report_to_json(rep))
        return dumps_json(doc), status
    rows = [["is_cnd", rep.is_cnd], ["min_centered_eigenvalue", rep.min_centered_eigenvalue]]
    if rep.witness is not None:
        rows.append(["witness_value", rep.witness_value])
        rows += [[f"witness[{format_vertex(p)}]", float(a)] for p, a in zip(K.points, rep.witness)]
    return dumps_csv(["quantity", "value"], rows), status


def _psi_from_spec(spec, tree, domain, seed):
    top = 1 / (tree.q + 1)
    kind, _, value = spec.partition(":")
    if kind == "random":
        rng = np.random.default_rng(seed)
        return {v: float(rng.uniform(0, top)) for v in domain}
    try:
        c = float(Fraction(value)) if value else top
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad psi value {value!r}") from None
    if kind == "constant":
        return {v: c for v in domain}
    if kind == "root":
        return {v: (c if v == ROOT else 0.0) for v in domain}
    raise UsageError(f"unknown psi kind {kind!r} (use constant[:c], root[:c] or random)")


def cmd_valette(args, tree):
    domain = tree.ball(ROOT, args.radius)
    psi = _psi_from_spec(args.psi, tree, domain, args.seed)
    K = valette_kernel(tree, psi, domain)
    rep = cnd_check(K, args.tol)
    inv = invariance_defect(tree, psi, domain)
    rows = [["points", len(domain)], ["is_cnd", rep.is_cnd],
            ["min_centered_eigenvalue", rep.min_centered_eigenvalue],
            ["invariance_defect", inv.defect], ["constancy_defect", inv.constancy_defect],
            ["isometries_tested", inv.n_maps]]
    status = EXIT_OK if rep.is_cnd else EXIT_FALSE
    if args.format == "json":
        return dumps_json({"q": tree.q, "radius": args.radius, "psi": args.psi, **dict(rows)}), status
    return dumps_csv(["quantity", "value"], rows), status


def cmd_selftest(args, tree):
    results = acceptance.run_all(args.seed)
    status = EXIT_OK if all(r.passed for r in results) else EXIT_FALSE
    if args.format == "json":
        doc = {"seed": args.seed, "passed": status == EXIT_OK,
               "criteria": [{"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail}
                            for r in results]}
        return dumps_json(doc), status
    lines = [r.line() for r in results]
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n", status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treecocycle",
                                     description="Harmonic analysis on the (q+1)-regular tree.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("green", parents=[_common(40, "radius of the absorbing ball for the walk sums")],
                       help="Green kernel value and its random-walk partial sums")
    p.add_argument("x", help="vertex address, e.g. / or /0/1")
    p.add_argument("y")
    p.add_argument("--steps", type=int, default=60, help="largest walk length N")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("profile", parents=[_common(64, "largest support radius allowed for truncation")],
                       help="radial growth profile with bound, slack and recurrence residual")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--kind", choices=("projected", "haagerup", "optimal"), default="projected")
    p.add_argument("--w", type=_positive_float, default=None, help="phi(1) for --kind optimal")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("project", parents=[_common(64, "largest support radius allowed for truncation")],
                       help="split chi(x, y) into gradient and harmonic parts")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("potentials", parents=[_common(6, "support radius of the potentials")],
                       help="virtual potentials f, f' and f~ along a ray")
    p.set_defaults(func=cmd_potentials)

    p = sub.add_parser("kernel-check", parents=[_common(1, "unused")],
                       help="decide whether a kernel file is conditionally of negative type")
    p.add_argument("file", help="CSV or JSON kernel file, '-' for stdin")
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("valette", parents=[_common(2, "radius of the ball carrying the kernel")],
                       help="Valette kernel of psi on a ball: CND verdict and invariance defect")
    p.add_argument("--psi", default="constant", help="constant[:c], root[:c] or random (seeded)")
    p.set_defaults(func=cmd_valette)

    p = sub.add_parser("selftest", parents=[_common(1, "unused")], help="run the acceptance suite")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tree = RegularTree(args.q)
        text, status = args.func(args, tree)
    except ResourceError as exc:
        print(f"treecocycle: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (AddressError, ParameterError, DomainError, ValidationError, KernelParseError, UsageError) as exc:
        print(f"treecocycle: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"treecocycle: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
