"""Command-line front end: ``feastlab {gen,solve,compare,filter}``.

Exit codes: 0 success/converged, 1 not converged, 2 usage error,
3 I/O or numerical failure.
"""

from dataclasses import replace
import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .contour import build_contour_rule, filter_sweep, rank_by_filter, sweep_to_csv
from .drivers import ALGORITHMS, SolverConfig, solve
from .exceptions import MatrixMarketError
from .harness import (
    DEFAULTS,
    FAMILY_OUTER_INTERVALS,
    ExperimentConfig,
    oracle_max_error,
    sidecar_path,
    run_experiment,
)
from .matmodel import (
    SpectrumLayout,
    assemble_matrix,
    generate_spectrum,
    read_eigenvalues,
    read_matrix_market,
    true_count_in_interval,
    write_eigenvalues,
    write_matrix_market,
)
from ._io import atomic_write

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _interval(args_pair):
    lo, hi = args_pair
    if not lo < hi:
        raise UsageError(f"interval needs lo < hi, got {lo} {hi}")
    return (lo, hi)


def cmd_gen(args):
    outer = args.outer
    if outer is None:
        if args.kind not in FAMILY_OUTER_INTERVALS:
            raise UsageError(f"--outer is required for --kind {args.kind}")
        outer = FAMILY_OUTER_INTERVALS[args.kind]
    if args.kind == "clustered" and args.clusters is None:
        raise UsageError("--kind clustered needs --clusters")
    interval = _interval(args.interval)
    try:
        layout = SpectrumLayout(
            n=args.n,
            inside_interval=interval,
            inside_count=args.m_inside,
            outside_interval=tuple(outer),
            outside_count=args.n - args.m_inside,
            placement="clustered" if args.kind == "clustered" else "uniform",
            num_clusters=args.clusters or 1,
            cluster_width=args.cluster_width,
            inside_placement=args.inside_placement,
            seed=args.seed,
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    decomp = generate_spectrum(layout)
    write_matrix_market(
        assemble_matrix(decomp),
        args.out,
        fmt=args.format,
        comment=f"feastlab gen --kind {args.kind} --seed {args.seed}",
    )
    eig_path = sidecar_path(args.out)
    write_eigenvalues(decomp.values, eig_path)
    print(f"matrix: {args.out}")
    print(f"eigenvalues: {eig_path}")
    print(f"true_count_in_interval: {true_count_in_interval(decomp, interval)}")
    return EXIT_OK


def _load_truth(path, matrix_path):
    if path:
        return read_eigenvalues(path)
    guess = sidecar_path(matrix_path)
    return read_eigenvalues(guess) if os.path.exists(guess) else None


def cmd_solve(args):
    interval = _interval(args.interval)
    A = read_matrix_market(args.matrix)
    if args.m0 > A.n:
        raise UsageError(f"--m0 {args.m0} exceeds the matrix dimension {A.n}")
    config = SolverConfig(
        m0=args.m0, n_c=args.nc, s=args.s, tol=args.tol,
        max_iter=args.max_iter, seed=args.seed,
    )
    sol = solve(A, interval, config, args.algo)
    trace_path = args.trace
    if trace_path is None:
        root, _ = os.path.splitext(args.matrix)
        trace_path = f"{root}_{args.algo}_trace.csv"
    atomic_write(trace_path, sol.trace.to_csv())

    final = sol.trace[-1].max_residual
    print(f"algorithm: {args.algo}")
    print(f"converged: {'yes' if sol.converged else 'no'}")
    print(f"iterations: {sol.iterations}")
    print(f"rhs_solved: {sol.accounting.rhs_solved}")
    print(f"final_residual: {final:.6e}")
    print(f"m_found: {sol.m_found}")
    print("eigenvalues: " + " ".join(f"{v:.16e}" for v in sol.eigenvalues))
    truth = _load_truth(args.eigenvalues, args.matrix)
    if truth is not None:
        print(f"true_count: {true_count_in_interval(truth, interval)}")
        print(f"oracle_max_err: {oracle_max_error(sol.eigenvalues, truth, interval):.6e}")
    print(f"trace: {trace_path}")
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def cmd_compare(args):
    try:
        config = ExperimentConfig.load(args.config)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MatrixMarketError):
            raise
        raise UsageError(f"bad experiment config: {exc}") from None
    if args.jobs is not None:
        config = replace(config, jobs=args.jobs)
    report = run_experiment(config)
    print(report.to_csv(), end="")
    print(f"report: {os.path.join(config.output_dir, 'report.csv')}", file=sys.stderr)
    return EXIT_OK


def cmd_filter(args):
    interval = _interval(args.interval)
    lo, hi = args.sweep
    if not lo < hi:
        raise UsageError(f"--sweep needs lo < hi, got {lo} {hi}")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    rule = build_contour_rule(interval, args.nc)
    text = sweep_to_csv(filter_sweep(rule, lo, hi, args.points))
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.eigenvalues and args.m0:
        values = read_eigenvalues(args.eigenvalues)
        if args.m0 >= values.size:
            raise UsageError("--m0 must be smaller than the number of eigenvalues")
        ranked, rho = rank_by_filter(rule, values)
        note = sys.stderr if not args.out else sys.stdout
        print(
            f"lambda_(m0+1) = {ranked[args.m0]:.16e}  rho = {rho[args.m0]:.16e}  "
            f"(m0 = {args.m0}, rho of m0-th = {rho[args.m0 - 1]:.16e})",
            file=note,
        )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="feastlab",
        description="FEAST, XFEAST and RFEAST interior eigensolvers for dense symmetric matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a test matrix with a prescribed spectrum")
    p.add_argument("--kind", choices=["sparse", "dense", "uniform", "clustered"], default="sparse")
    p.add_argument("--n", type=int, default=545)
    p.add_argument("--m-inside", type=int, default=50)
    p.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"), default=[-1.0, 1.0])
    p.add_argument("--outer", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--clusters", type=int)
    p.add_argument("--cluster-width", type=float, default=0.0)
    p.add_argument("--inside-placement", choices=["uniform", "midpoint"], default="midpoint")
    p.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    p.add_argument("--format", choices=["coordinate", "array"], default="coordinate")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run one solver on a Matrix Market file")
    p.add_argument("--algo", choices=sorted(ALGORITHMS), required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--m0", type=int, required=True)
    p.add_argument("--nc", type=int, default=8)
    p.add_argument("--s", type=int, default=DEFAULTS["s"])
    p.add_argument("--tol", type=float, default=DEFAULTS["tol"])
    p.add_argument("--max-iter", type=int, default=DEFAULTS["max_iter"])
    p.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    p.add_argument("--trace", help="trace CSV path (default: <matrix>_<algo>_trace.csv)")
    p.add_argument("--eigenvalues", help="ground-truth sidecar (default: <matrix>.eig if present)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run a JSON-configured comparison grid")
    p.add_argument("config")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("filter", help="sample the rational filter function")
    p.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--nc", type=int, default=8)
    p.add_argument("--sweep", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--points", type=int, default=1201)
    p.add_argument("--out")
    p.add_argument("--eigenvalues", help="sidecar used to annotate rho(lambda_(m0+1))")
    p.add_argument("--m0", type=int)
    p.set_defaults(func=cmd_filter)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"feastlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, MatrixMarketError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"feastlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"feastlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
