"""FEAST subspace iteration and its two subspace-expanding variants.

``feast_solve``
    filter the trial block, Rayleigh-Ritz, repeat.
``xfeast_solve``
    keep a sliding window of the last ``s`` filtered blocks and run
    Rayleigh-Ritz on their (orthonormalized) union.
``rfeast_solve``
    after each filter step, run ``s`` Rayleigh-Ritz passes, appending the
    residual block of the selected pairs to the search space between passes.

Both variants solve ``n_c * m0`` right-hand sides per filter application,
the same as plain FEAST with subspace size ``m0``.
"""

from dataclasses import dataclass, field
import csv
import io
import logging
import warnings

import numpy as np

from ._validation import check_interval, check_positive_int, check_symmetric_matrix
from .contour import SearchInterval, build_contour_rule
from .exceptions import CholeskyError, RankCollapseError
from .filterop import FactorizationCache, SolveAccounting, apply_filter
from .ritz import (
    DROP_TOL,
    PIVOT_TOL,
    SelectionPolicy,
    count_inside,
    orthonormalize,
    rayleigh_ritz,
    select_pairs,
)

__all__ = [
    "SolverConfig",
    "TraceRecord",
    "ConvergenceTrace",
    "Solution",
    "make_initial_guess",
    "feast_solve",
    "xfeast_solve",
    "rfeast_solve",
    "solve",
    "ALGORITHMS",
    "TRACE_HEADER",
]

logger = logging.getLogger(__name__)

TRACE_HEADER = ("iter", "subspace_dim", "rhs_cumulative", "max_residual", "m_found")


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by the three drivers.

    ``s`` is the number of stored filtered blocks for XFEAST and the number of
    Rayleigh-Ritz passes per filter step for RFEAST; FEAST ignores it.
    ``orthonormalize_filtered=False`` makes FEAST (and RFEAST's first pass)
    solve the reduced generalized problem on the raw filtered block.
    """

    m0: int
    n_c: int = 8
    s: int = 1
    tol: float = 1e-12
    max_iter: int = 50
    seed: int = 0
    orthogonalizer: str = "svd"
    drop_tol: float = DROP_TOL
    pivot_tol: float = PIVOT_TOL
    orthonormalize_filtered: bool = True
    cache_factorizations: bool = False
    workers: int = None

    def __post_init__(self):
        check_positive_int(self.m0, "m0")
        check_positive_int(self.n_c, "n_c")
        check_positive_int(self.s, "s")
        check_positive_int(self.max_iter, "max_iter")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.orthogonalizer not in ("svd", "qr"):
            raise ValueError(f"orthogonalizer must be 'svd' or 'qr', got {self.orthogonalizer!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    subspace_dim: int
    rhs_cumulative: int
    max_residual: float
    m_found: int
    filter_applications: int
    recoveries: int = 0

    def as_row(self):
        return (
            str(self.iteration),
            str(self.subspace_dim),
            str(self.rhs_cumulative),
            f"{self.max_residual:.16e}",
            str(self.m_found),
        )


class ConvergenceTrace:
    """Per-iteration convergence records of one solve."""

    def __init__(self, records=()):
        self.records = list(records)

    def append(self, record):
        if self.records and record.rhs_cumulative <= self.records[-1].rhs_cumulative:
            raise ValueError("cumulative RHS count must increase between records")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def residuals(self):
        return np.array([r.max_residual for r in self.records])

    @property
    def rhs(self):
        return np.array([r.rhs_cumulative for r in self.records], dtype=np.int64)

    @property
    def recoveries(self):
        return self.records[-1].recoveries if self.records else 0

    def rhs_to_reach(self, threshold):
        """Cumulative RHS count when the residual first drops to ``threshold``."""
        for r in self.records:
            if r.max_residual <= threshold:
                return r.rhs_cumulative
        return float("inf")

    def to_csv(self, fh=None):
        buf = io.StringIO() if fh is None else fh
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for r in self.records:
            writer.writerow(r.as_row())
        return buf.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != TRACE_HEADER:
            raise ValueError("not a convergence trace CSV")
        return cls(
            TraceRecord(int(a), int(b), int(c), float(d), int(e), -1)
            for a, b, c, d, e in rows[1:]
        )


@dataclass
class Solution:
    """Eigenpairs found in the search interval, sorted by eigenvalue."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray
    converged: bool
    iterations: int
    accounting: SolveAccounting
    trace: ConvergenceTrace
    algorithm: str = "feast"
    config: SolverConfig = field(default=None, repr=False)

    @property
    def m_found(self):
        return len(self.eigenvalues)

    @property
    def max_residual(self):
        return float(self.residual_norms.max()) if self.residual_norms.size else 0.0


def make_initial_guess(n, m0, seed, drop_tol=DROP_TOL):
    """Seeded standard-Gaussian ``n x m0`` block of full column rank."""
    n = check_positive_int(n, "n")
    m0 = check_positive_int(m0, "m0")
    if m0 > n:
        raise ValueError(f"m0 = {m0} exceeds the matrix dimension n = {n}")
    X0 = np.random.default_rng(int(seed)).standard_normal((n, m0))
    _, rank = orthonormalize(X0, drop_tol, method="qr")
    if rank < m0:
        raise RankCollapseError(f"initial guess has rank {rank} < m0 = {m0}")
    return X0


class _Run:
    """State shared by the driver loops: filter, accounting, trace, padding."""

    def __init__(self, A, interval, config, X0, algorithm):
        self.A = check_symmetric_matrix(A)
        self.n = self.A.shape[0]
        self.interval = SearchInterval.coerce(check_interval(interval))
        self.config = config
        self.algorithm = algorithm
        self.rule = build_contour_rule(self.interval, config.n_c)
        self.policy = SelectionPolicy(config.m0, self.interval)
        self.accounting = SolveAccounting()
        self.cache = FactorizationCache() if config.cache_factorizations else None
        self.trace = ConvergenceTrace()
        self.filter_applications = 0
        self.recoveries = 0
        if config.m0 > self.n:
            raise ValueError(f"m0 = {config.m0} exceeds the matrix dimension n = {self.n}")
        if X0 is None:
            X0 = make_initial_guess(self.n, config.m0, config.seed, config.drop_tol)
        else:
            X0 = np.asarray(X0, dtype=np.float64)
            if X0.shape != (self.n, config.m0):
                raise ValueError(f"initial guess must be {self.n} x {config.m0}, got {X0.shape}")
        self.X0 = X0
        self._pad_rng = np.random.default_rng([int(config.seed), 1])

    def filter(self, X):
        Y = apply_filter(
            self.A, self.rule, X, self.accounting, self.cache, self.config.workers
        )
        self.filter_applications += 1
        return Y

    def orth(self, X):
        return orthonormalize(X, self.config.drop_tol, self.config.orthogonalizer)[0]

    def pad(self, X):
        """Top a block up to ``m0`` columns with random directions.

        Keeps the per-filter cost at ``n_c * m0`` when rank was dropped.
        """
        missing = self.config.m0 - X.shape[1]
        if missing <= 0:
            return X
        logger.debug("padding subspace with %d random columns", missing)
        return np.hstack([X, self._pad_rng.standard_normal((self.n, missing))])

    def record(self, iteration, subspace_dim, max_residual, m_found):
        rec = TraceRecord(
            iteration,
            subspace_dim,
            self.accounting.rhs_solved,
            float(max_residual),
            m_found,
            self.filter_applications,
            self.recoveries,
        )
        self.trace.append(rec)
        logger.info(
            "%s iter %d: dim=%d rhs=%d res=%.3e m=%d",
            self.algorithm, iteration, subspace_dim, rec.rhs_cumulative,
            max_residual, m_found,
        )
        return rec

    def solution(self, pairs, converged, iterations):
        order = np.argsort(pairs.values, kind="stable")
        pairs = pairs.take(order)
        return Solution(
            eigenvalues=pairs.values,
            eigenvectors=pairs.vectors,
            residual_norms=pairs.residual_norms,
            converged=converged,
            iterations=iterations,
            accounting=self.accounting.snapshot(),
            trace=self.trace,
            algorithm=self.algorithm,
            config=self.config,
        )


def feast_solve(A, interval, config, X0=None):
    """Plain FEAST subspace iteration.

    Each iteration filters the current ``m0`` Ritz vectors, orthonormalizes
    the filtered block, and extracts Ritz pairs; the error is the largest
    residual norm among Ritz values inside the interval.
    """
    run = _Run(A, interval, config, X0, "feast")
    X = run.X0
    for it in range(1, config.max_iter + 1):
        Y = run.filter(X)
        if config.orthonormalize_filtered:
            Y = run.orth(Y)
        ritz = rayleigh_ritz(run.A, Y, run.interval, config.pivot_tol)
        inside = ritz.take(np.flatnonzero(ritz.inside_flags))
        res = ritz.max_inside_residual
        run.record(it, Y.shape[1], res, len(inside))
        if res <= config.tol:
            return run.solution(inside, True, it)
        X = run.pad(ritz.vectors)
    return run.solution(inside, False, config.max_iter)


def xfeast_solve(A, interval, config, X0=None):
    """FEAST with a sliding window of ``s`` stored filtered blocks.

    The window starts as ``[X0, rho X0, ..., rho^(s-1) X0]``.  Each iteration
    orthonormalizes the window, runs Rayleigh-Ritz, selects ``m0`` pairs,
    filters them, and replaces the oldest block by the new filtered one.  The
    Rayleigh-Ritz pass on an unfiltered window (only when ``s = 1``, first
    iteration) is traced but never accepted as converged.
    """
    run = _Run(A, interval, config, X0, "xfeast")
    if config.s * config.m0 > run.n:
        warnings.warn(
            f"s * m0 = {config.s * config.m0} exceeds n = {run.n}; the window "
            "will be rank deficient",
            RuntimeWarning,
            stacklevel=2,
        )
    blocks = [run.X0]
    for _ in range(config.s - 1):
        blocks.append(run.filter(blocks[-1]))
    for it in range(1, config.max_iter + 1):
        U = run.orth(np.hstack(blocks))
        ritz = rayleigh_ritz(run.A, U, run.interval, config.pivot_tol)
        chosen = select_pairs(ritz, run.policy)
        inside = chosen.take(np.flatnonzero(chosen.inside_flags))
        res = chosen.max_inside_residual
        run.record(it, U.shape[1], res, len(inside))
        if res <= config.tol and run.filter_applications > 0:
            return run.solution(inside, True, it)
        blocks.append(run.filter(run.pad(chosen.vectors)))
        if len(blocks) > config.s:
            del blocks[0]
    return run.solution(inside, False, config.max_iter)


def _expansion_block(R, threshold):
    """Unit-normalized residual columns; numerically zero columns are dropped."""
    norms = np.linalg.norm(R, axis=0)
    keep = norms > threshold
    return R[:, keep] / norms[keep]


def rfeast_solve(A, interval, config, X0=None):
    """FEAST with residual-block subspace expansion.

    After filtering, ``s`` Rayleigh-Ritz passes are made; between passes the
    residual block of the ``m0`` selected pairs is appended to the search
    space without re-orthogonalization (Ritz residuals are orthogonal to the
    Ritz vectors they come from).  The number of inside pairs found by the
    first pass fixes how many inside pairs count as genuine; those with the
    lowest residuals are reported and used for the error check.

    If a later pass finds the overlap matrix numerically singular, the search
    space is orthonormalized once and the pass retried; such recoveries are
    counted in the trace.
    """
    run = _Run(A, interval, config, X0, "rfeast")
    if (config.s + 1) * config.m0 > run.n:
        warnings.warn(
            f"(s + 1) * m0 = {(config.s + 1) * config.m0} exceeds n = {run.n}",
            RuntimeWarning,
            stacklevel=2,
        )
    drop = 16 * np.finfo(float).eps * np.max(np.abs(run.A).sum(axis=0))
    X = run.X0
    for it in range(1, config.max_iter + 1):
        Xp = run.filter(X)
        if config.orthonormalize_filtered:
            Xp = run.orth(Xp)
        for j in range(1, config.s + 1):
            try:
                ritz = rayleigh_ritz(run.A, Xp, run.interval, config.pivot_tol)
            except CholeskyError:
                if j == 1 and config.orthonormalize_filtered:
                    raise
                run.recoveries += 1
                Xp = run.orth(Xp)
                ritz = rayleigh_ritz(run.A, Xp, run.interval, config.pivot_tol)
            if j == 1:
                m_expected = count_inside(ritz)
            chosen = select_pairs(ritz, run.policy)
            if j < config.s:
                R = _expansion_block(chosen.residuals, drop)
                if R.shape[1]:
                    Xp = np.hstack([Xp, R])
        inside_idx = np.flatnonzero(ritz.inside_flags)
        inside_idx = inside_idx[np.argsort(ritz.residual_norms[inside_idx], kind="stable")]
        wanted = ritz.take(inside_idx[:m_expected])
        res = float(wanted.residual_norms.max()) if len(wanted) else 0.0
        run.record(it, Xp.shape[1], res, len(wanted))
        if res <= config.tol:
            return run.solution(wanted, True, it)
        X = run.pad(chosen.vectors)
    return run.solution(wanted, False, config.max_iter)


ALGORITHMS = {"feast": feast_solve, "xfeast": xfeast_solve, "rfeast": rfeast_solve}


def solve(A, interval, config, algorithm="feast", X0=None):
    """Dispatch to one of :data:`ALGORITHMS` by name."""
    try:
        driver = ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}"
        ) from None
    return driver(A, interval, config, X0)
