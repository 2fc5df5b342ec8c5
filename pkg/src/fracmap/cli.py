"""Command-line interface: ``fracmap <subcommand> [options]``.

Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 solver did not
converge (partial output is still written).
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import sys
import time

from . import coeffs as co
from .bifurcation import cascade, feigenbaum_ratios
from .diagram import CSV_COLUMNS, asymptotic_diagram, finite_time_diagram
from .maps import MAPS, check_iterate_order, get_map, iterate
from .periodic import classic_orbit_guess, continue_in_K, solve_period_l
from .specfun import DomainError

log = logging.getLogger("fracmap")

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_UNCONVERGED = 0, 1, 2, 3

# Level-1 bifurcation guesses; the integer-order first doubling.
BIFURCATION_GUESS_K = {"logistic": 3.0}


class Output:
    """Rows plus diagnostics, serialised as CSV or as a JSON object."""

    def __init__(self, columns, config):
        self.columns = list(columns)
        self.rows: list[list] = []
        self.diagnostics: list[str] = []
        self.config = config

    def add(self, *row):
        self.rows.append(list(row))

    def note(self, message: str):
        self.diagnostics.append(message)
        print(message, file=sys.stderr)

    def _fmt(self, v):
        if v is None:
            return ""
        if isinstance(v, float):
            return f"{v:.17g}"
        return v

    def write(self, fh, fmt: str):
        if fmt == "json":
            results = [
                {c: v for c, v in zip(self.columns, row) if v is not None} for row in self.rows
            ]
            doc = {"config": self.config, "results": results, "diagnostics": self.diagnostics}
            json.dump(doc, fh, indent=2, allow_nan=True)
            fh.write("\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([self._fmt(v) for v in row])


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _solver_kwargs(args, default_tol):
    return {"tol": default_tol if args.tol is None else args.tol, "max_iter": args.max_iter}


def cmd_coeffs(args, out: Output) -> int:
    alpha = co.check_order(args.alpha)
    if args.l < 1:
        raise DomainError("l must be >= 1")
    method = {"analytic": "analytic", "tail": "tail_oracle", "naive": "naive"}[args.method]
    if method == "analytic":
        values = list(co.cached_table(alpha, args.l).s)
    elif method == "tail_oracle":
        n = args.n_terms or co.DEFAULT_TAIL_TERMS
        values = [co.s_series_tail_oracle(alpha, args.l, p, n) for p in range(1, args.l + 1)]
    else:
        n = args.n_terms or co.DEFAULT_NAIVE_TERMS
        values = [co.s_naive_truncation(alpha, args.l, p, n) for p in range(1, args.l + 1)]
    for p, v in enumerate(values, start=1):
        out.add(p, float(v), method, alpha, args.l)
    out.add("total", math.fsum(values), method, alpha, args.l)
    return EXIT_OK


def cmd_iterate(args, out: Output) -> int:
    alpha = check_iterate_order(args.alpha)
    traj = iterate(get_map(args.map, args.K, args.h), alpha, args.x0, args.N)
    for n, x in enumerate(traj.values):
        out.add(n, float(x))
    if traj.diverged:
        out.note(f"trajectory diverged at n={len(traj) - 1}; output truncated")
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_periodic(args, out: Output) -> int:
    alpha = co.check_order(args.alpha)
    l = args.l
    kw = _solver_kwargs(args, 1e-13)
    out.columns = ["K", "l", "classification", *[f"x_{i}" for i in range(1, l + 1)], "residual_norm"]
    if args.K is not None:
        spec = get_map(args.map, args.K, args.h)
        guess = _floats(args.guess) if args.guess else classic_orbit_guess(spec, l)
        sols = [solve_period_l(spec, alpha, l, guess, **kw)]
        reason = "completed"
    else:
        if None in (args.K_start, args.K_end, args.step):
            raise DomainError("give either --K or all of --K-start, --K-end, --step")
        spec = get_map(args.map, args.K_start, args.h)
        guess = _floats(args.guess) if args.guess else classic_orbit_guess(spec, l)
        branch = continue_in_K(spec, alpha, l, args.K_start, args.K_end, args.step, guess, **kw)
        sols, reason = branch.solutions, branch.reason
    for s in sols:
        out.add(float(s.K), l, s.classification, *map(float, s.points), float(s.residual_norm))
    if reason != "completed" or any(not s.converged for s in sols):
        out.note(f"branch terminated: {reason}" if reason != "completed" else "Newton did not converge")
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_bifurcate(args, out: Output) -> int:
    alpha = co.check_order(args.alpha)
    guess_K = args.guess_K if args.guess_K is not None else BIFURCATION_GUESS_K.get(args.map, 3.0)
    spec = get_map(args.map, guess_K, args.h)
    guess_xs = [args.guess_x] if args.guess_x is not None else None
    kw = _solver_kwargs(args, 1e-12)
    points = cascade(spec, alpha, args.n, guess_xs, guess_K, **kw)
    points = [p for p in points if p.converged]
    width = 2 ** (args.n - 1)
    out.columns = ["n", "K_bif", "det_A", "residual_norm", *[f"x_{i}" for i in range(1, width + 1)]]
    ratios = {}
    if args.ratios:
        out.columns.append("ratio")
        if len(points) >= 3:
            ratios = {p.n: r for p, r in zip(points[1:], feigenbaum_ratios(points))}
    for p in points:
        xs = [float(x) for x in p.points] + [None] * (width - p.period)
        row = [p.n, p.K_bif, p.det_A, p.residual_norm, *xs]
        if args.ratios:
            row.append(ratios.get(p.n))
        out.add(*row)
    if len(points) < args.n:
        out.note(f"cascade stopped after level {len(points)} of {args.n}")
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_diagram(args, out: Output) -> int:
    spec = get_map(args.map, args.K_start, args.h)
    records = []
    if args.source in ("asymptotic", "both"):
        kw = _solver_kwargs(args, 1e-13)
        records += asymptotic_diagram(
            spec, args.alpha, args.K_start, args.K_end, args.step, _ints(args.periods), **kw
        )
    if args.source in ("finite_time", "both"):
        check_iterate_order(args.alpha)
        records += finite_time_diagram(
            spec, args.alpha, args.K_start, args.K_end, args.step,
            args.N_iter, args.N_keep, args.x0, jobs=args.jobs,
        )
    records.sort(key=lambda r: r.sort_key())
    for r in records:
        out.add(r.K, r.period, r.point_index, r.x, r.source, r.flag)
    if any(r.flag == "unconverged" for r in records):
        out.note("some records are unconverged")
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_validate_identity(args, out: Output) -> int:
    lhs, rhs = co.validate_identity(args.gamma, args.s, args.t)
    out.add(args.gamma, args.s, args.t, lhs, rhs, abs(lhs - rhs))
    return EXIT_OK


COLUMNS = {
    "coeffs": ["p", "S_p", "method", "alpha", "l"],
    "iterate": ["n", "x_n"],
    "periodic": [],
    "bifurcate": [],
    "diagram": list(CSV_COLUMNS),
    "validate-identity": ["gamma", "s", "t", "lhs", "rhs", "abs_diff"],
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, help="order of the map")
    common.add_argument("--map", default="logistic", choices=sorted(MAPS))
    common.add_argument("--h", type=float, default=1.0, help="time step (default 1)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", default="csv", choices=("csv", "json"))
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--max-iter", type=int, default=200)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fracmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", parents=[common], help="coefficient sums S_{p,l}")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--method", default="analytic", choices=("analytic", "tail", "naive"))
    p.add_argument("--n-terms", type=int, default=None)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("iterate", parents=[common], help="iterate the map with full memory")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--x0", type=float, default=0.3)
    p.add_argument("--N", type=int, default=1000)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("periodic", parents=[common], help="asymptotically periodic points")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--K", type=float)
    p.add_argument("--K-start", type=float)
    p.add_argument("--K-end", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--guess", help="comma-separated initial points")
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser("bifurcate", parents=[common], help="period-doubling bifurcation points")
    p.add_argument("--n", type=int, required=True, help="highest doubling level")
    p.add_argument("--guess-K", type=float)
    p.add_argument("--guess-x", type=float)
    p.add_argument("--ratios", action="store_true", help="append interval ratios")
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("diagram", parents=[common], help="bifurcation diagram data")
    p.add_argument("--K-start", type=float, required=True)
    p.add_argument("--K-end", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--periods", default="1,2,4")
    p.add_argument("--source", default="asymptotic", choices=("asymptotic", "finite_time", "both"))
    p.add_argument("--N-iter", type=int, default=10**4)
    p.add_argument("--N-keep", type=int, default=32)
    p.add_argument("--x0", type=float, default=0.3)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("validate-identity", parents=[common], help="check the root-of-unity binomial identity")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.set_defaults(func=cmd_validate_identity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.alpha is None and args.command != "validate-identity":
        print("--alpha is required", file=sys.stderr)
        return EXIT_INPUT
    config = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    out = Output(COLUMNS[args.command], config)
    started = time.perf_counter()
    try:
        code = args.func(args, out)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    log.info("%s finished in %.3fs", args.command, time.perf_counter() - started)
    try:
        with contextlib.ExitStack() as stack:
            fh = sys.stdout if args.out == "-" else stack.enter_context(open(args.out, "w", newline=""))
            out.write(fh, args.format)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
