"""``perm``: command-line front end.

Exit codes: 0 success, 1 domain error, 2 usage error, 3 failure of a proven
claim during ``verify``, 4 zero permanent and 5 scaling non-convergence
during ``approx``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import approx, ascent, bounds, exact, scaling, verify
from .errors import ConvergenceError, PermError
from .matrix import parse_matrix

EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_VERIFY_FAILED = 3
EXIT_ZERO_PERMANENT = 4
EXIT_NO_CONVERGENCE = 5

log = logging.getLogger("permbounds")


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump_object(obj, out) -> None:
    out.write(json.dumps(obj, default=_json_default, sort_keys=True))
    out.write("\n")


def _dump_csv(header, rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(x) for x in row])


def _read_matrix(args) -> np.ndarray:
    if args.matrix and args.matrix != "-":
        with open(args.matrix, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    fmt = args.input_format
    if fmt == "auto":
        fmt = "structured" if text.lstrip().startswith("{") else "csv"
    return parse_matrix(text, fmt)


def _flat_report(d: dict) -> tuple[list, list]:
    keys = sorted(d)
    return keys, [d[k] for k in keys]


# -- subcommands --------------------------------------------------------------


def cmd_exact(args, out) -> int:
    m = _read_matrix(args)
    value = exact.permanent_naive(m) if args.method == "naive" else exact.permanent_ryser(m)
    if args.format == "object":
        _dump_object({"n": m.shape[0], "method": args.method, "permanent": value}, out)
    else:
        out.write(_num(value) + "\n")
    return 0


def cmd_bound(args, out) -> int:
    if args.sweep:
        p_from, p_to, steps = float(args.sweep[0]), float(args.sweep[1]), int(args.sweep[2])
        header = ["p", "lower", "upper_product", "upper_closed", "regime"]
        rows = []
        for p in np.linspace(p_from, p_to, steps):
            r = bounds.bound_report(args.n, float(p))
            rows.append([r.p, r.lower, r.upper_product, r.upper_closed, r.regime])
        if args.format == "object":
            _dump_object([dict(zip(header, row)) for row in rows], out)
        else:
            _dump_csv(header, rows, out)
        return 0
    if args.p is None:
        raise PermError("bound needs --p or --sweep")
    d = bounds.bound_report(args.n, args.p).to_dict()
    if args.format == "csv":
        _dump_csv(*_flat_report(d), out)
    else:
        _dump_object(d, out)
    return 0


def cmd_approx(args, out) -> int:
    m = _read_matrix(args)
    try:
        res = approx.approximate_permanent(m, tol=args.tol)
    except ConvergenceError as exc:
        log.error("%s", exc)
        _dump_object({"error": "non_convergence", "residual": exc.result.residual}, out)
        return EXIT_NO_CONVERGENCE
    d = res.to_dict()
    if args.format == "csv":
        keys = ["lo", "hi", "estimate", "guarantee_factor", "case", "residual"]
        _dump_csv(keys, [[d[k] for k in keys]], out)
    else:
        _dump_object(d, out)
    return EXIT_ZERO_PERMANENT if res.case == approx.ZERO else 0


def cmd_scale(args, out) -> int:
    m = _read_matrix(args)
    res = scaling.sinkhorn_scale(m, tol=args.tol, max_iters=args.iters or 100_000)
    d = res.to_dict()
    if args.format == "csv":
        n = m.shape[0]
        rows = [[i, res.row_scale[i], res.col_scale[i], *res.scaled[i]] for i in range(n)]
        _dump_csv(["row", "row_scale", "col_scale"] + [f"c{j}" for j in range(n)], rows, out)
    else:
        _dump_object(d, out)
    return 0 if res.converged else EXIT_NO_CONVERGENCE


def cmd_match(args, out) -> int:
    m = _read_matrix(args)
    res = scaling.max_product_matching(m)
    if args.format == "csv":
        _dump_csv(["row", "col"], list(enumerate(res.sigma)), out)
    else:
        _dump_object(res.to_dict(), out)
    return 0


def cmd_ascend(args, out) -> int:
    m = _read_matrix(args)
    trace = ascent.baum_eagon_iterate(m, args.q, max_iters=args.iters or 100, stop_tol=args.stop_tol)
    if args.format == "object":
        _dump_object(
            {"q": args.q, "values": trace.values, "converged": trace.converged, "final": trace.iterates[-1]},
            out,
        )
    else:
        _dump_csv(["iteration", "value"], trace.to_rows(), out)
    return 0


def cmd_guarantee(args, out) -> int:
    rows = approx.guarantee_curve(args.n_from, args.n_to)
    header = ["n", "log_factor", "log_bare", "log_improvement", "factor"]
    if args.format == "object":
        _dump_object(rows, out)
    else:
        _dump_csv(header, [[r[k] for k in header] for r in rows], out)
    return 0


SUMMARY_HEADER = ["check_name", "parameters", "margin", "tolerance", "pass", "informational"]


def _summary_rows(reports):
    for r in reports:
        yield [
            r.check_name,
            json.dumps(r.parameters, sort_keys=True, default=_json_default),
            r.margin,
            r.tolerance,
            r.passed,
            r.informational,
        ]


def cmd_verify(args, out) -> int:
    reports = verify.run_suite(args.suite, seed=args.seed, jobs=args.jobs, restarts=args.restarts)
    if args.format == "csv":
        _dump_csv(SUMMARY_HEADER, _summary_rows(reports), out)
    else:
        for r in reports:
            _dump_object(r.to_dict(), out)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8", newline="") as fh:
            _dump_csv(SUMMARY_HEADER, _summary_rows(reports), fh)
    failed = [r for r in reports if r.failed_proven]
    informational_misses = [r for r in reports if r.informational and not r.passed]
    for r in informational_misses:
        log.warning("finding (open conjecture): %s %s margin=%.3e", r.check_name, r.parameters, r.margin)
    for r in failed:
        log.error("FAILED %s %s margin=%.3e", r.check_name, r.parameters, r.margin)
    return EXIT_VERIFY_FAILED if failed else 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perm", description="Permanent bounds and certified approximation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p, default):
        p.add_argument("--format", choices=["csv", "object"], default=default)

    def matrix_input(p):
        p.add_argument("matrix", nargs="?", help="matrix file (default: stdin)")
        p.add_argument("--input-format", choices=["auto", "csv", "structured"], default="auto")

    p = sub.add_parser("exact", help="exact permanent")
    matrix_input(p)
    p.add_argument("--method", choices=["ryser", "naive"], default="ryser")
    fmt(p, "csv")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bound", help="closed-form bounds on the max permanent over unit l_p rows")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--sweep", nargs=3, metavar=("P_FROM", "P_TO", "STEPS"))
    fmt(p, None)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("approx", help="certified permanent interval")
    matrix_input(p)
    p.add_argument("--tol", type=float, default=1e-8)
    fmt(p, "object")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("scale", help="Sinkhorn scaling")
    matrix_input(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--iters", type=int)
    fmt(p, "object")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("match", help="maximum-product perfect matching")
    matrix_input(p)
    fmt(p, "object")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("ascend", help="Baum-Eagon ascent trace")
    matrix_input(p)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--stop-tol", type=float, default=1e-12)
    fmt(p, "csv")
    p.set_defaults(func=cmd_ascend)

    p = sub.add_parser("verify", help="run verification checks")
    p.add_argument("suite", choices=["wkp", "theta", "onevar", "prop", "baum", "conjecture", "minc", "all"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--restarts", type=int)
    p.add_argument("--summary", help="also write a CSV summary to this path")
    fmt(p, "object")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("guarantee", help="worst-case approximation factor by dimension")
    p.add_argument("--n-from", type=int, default=2)
    p.add_argument("--n-to", type=int, default=20)
    fmt(p, "csv")
    p.set_defaults(func=cmd_guarantee)
    return parser


def run(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    level = os.environ.get("PERM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", "unset") is None:
        args.format = "csv" if getattr(args, "sweep", None) else "object"
    try:
        return args.func(args, out)
    except (PermError, ValueError, OSError) as exc:
        print(f"perm: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
