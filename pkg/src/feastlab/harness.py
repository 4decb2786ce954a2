"""Experiment runner: solver comparisons over parameter grids.

An experiment is described by a JSON document::

    {
      "matrix": {"layout": {...SpectrumLayout fields...}}
                or {"path": "dense.mtx", "eigenvalues": "dense.eig"},
      "interval": [-1, 1],
      "cells": [{"algo": "xfeast", "m0": 51, "nc": 8, "s": 3}, ...],
      "tol": 1e-12, "max_iter": 50, "seed": 42,
      "threshold": 1e-6, "output_dir": "out", "jobs": 1
    }

Every optional field takes its value from :data:`DEFAULTS`; nothing else in
the parser supplies defaults.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import json
import logging
import math
import os

import numpy as np

from ._io import atomic_write
from ._validation import check_interval
from .contour import SearchInterval
from .drivers import ALGORITHMS, ConvergenceTrace, SolverConfig, solve
from .matmodel import (
    SpectrumLayout,
    assemble_matrix,
    generate_spectrum,
    read_eigenvalues,
    read_matrix_market,
)

__all__ = [
    "DEFAULTS",
    "FAMILY_OUTER_INTERVALS",
    "REPORT_HEADER",
    "Cell",
    "ExperimentConfig",
    "CellResult",
    "ComparisonReport",
    "family_layout",
    "sidecar_path",
    "oracle_max_error",
    "run_cell",
    "run_experiment",
]

logger = logging.getLogger(__name__)

#: Defaults for optional experiment fields (also used by the CLI).
DEFAULTS = {
    "s": 1,
    "tol": 1e-12,
    "max_iter": 50,
    "seed": 42,
    "threshold": None,  # None: use tol
    "output_dir": ".",
    "jobs": 1,
}

#: Outer-eigenvalue ranges of the two 545 x 545 test families.
FAMILY_OUTER_INTERVALS = {"sparse": (1.01, 20.81), "dense": (1.01, 1.1)}

REPORT_HEADER = (
    "algo", "m0", "nc", "s", "converged", "iters", "rhs_solved",
    "final_residual", "oracle_max_err",
)


def family_layout(kind, n=545, m_inside=50, interval=(-1.0, 1.0), seed=42):
    """Layout of the "sparse" or "dense" test family.

    ``m_inside`` eigenvalues sit at cell midpoints of ``interval`` (so none lies
    on an endpoint); the rest are equally spaced over the family's outer range.
    """
    return SpectrumLayout(
        n=n,
        inside_interval=tuple(interval),
        inside_count=m_inside,
        outside_interval=FAMILY_OUTER_INTERVALS[kind],
        outside_count=n - m_inside,
        placement="uniform",
        inside_placement="midpoint",
        seed=seed,
    )


def sidecar_path(matrix_path):
    """Ground-truth eigenvalue file stored next to a matrix file."""
    root, _ = os.path.splitext(os.fspath(matrix_path))
    return root + ".eig"


@dataclass(frozen=True)
class Cell:
    algo: str
    m0: int
    nc: int
    s: int = DEFAULTS["s"]

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")

    @property
    def label(self):
        return f"{self.algo}_m{self.m0}_nc{self.nc}_s{self.s}"


@dataclass(frozen=True)
class ExperimentConfig:
    matrix: dict
    interval: tuple
    cells: tuple
    tol: float = DEFAULTS["tol"]
    max_iter: int = DEFAULTS["max_iter"]
    seed: int = DEFAULTS["seed"]
    threshold: float = DEFAULTS["threshold"]
    output_dir: str = DEFAULTS["output_dir"]
    jobs: int = DEFAULTS["jobs"]

    def __post_init__(self):
        object.__setattr__(self, "interval", check_interval(self.interval))
        if not self.cells:
            raise ValueError("experiment needs at least one cell")
        if not ("layout" in self.matrix) ^ ("path" in self.matrix):
            raise ValueError("matrix source needs exactly one of 'layout' or 'path'")

    @classmethod
    def from_dict(cls, data, base_dir="."):
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        data = dict(data)
        cells = []
        for i, c in enumerate(data.get("cells") or ()):
            extra = set(c) - {"algo", "m0", "nc", "s"}
            if extra:
                raise ValueError(f"cell {i}: unknown fields {sorted(extra)}")
            cells.append(Cell(c["algo"], int(c["m0"]), int(c["nc"]), int(c.get("s", DEFAULTS["s"]))))
        data["cells"] = tuple(cells)
        matrix = dict(data.get("matrix") or {})
        for key in ("path", "eigenvalues"):
            if key in matrix and not os.path.isabs(matrix[key]):
                matrix[key] = os.path.join(base_dir, matrix[key])
        data["matrix"] = matrix
        if "output_dir" in data and not os.path.isabs(data["output_dir"]):
            data["output_dir"] = os.path.join(base_dir, data["output_dir"])
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))

    @property
    def convergence_threshold(self):
        return self.tol if self.threshold is None else self.threshold

    def load_problem(self):
        """Return ``(A, true_eigenvalues or None)``."""
        if "layout" in self.matrix:
            layout = dict(self.matrix["layout"])
            for key in ("inside_interval", "outside_interval"):
                if key in layout:
                    layout[key] = tuple(layout[key])
            decomp = generate_spectrum(SpectrumLayout(**layout))
            return assemble_matrix(decomp), decomp.values
        A = read_matrix_market(self.matrix["path"])
        truth = self.matrix.get("eigenvalues")
        if truth is None and os.path.exists(sidecar_path(self.matrix["path"])):
            truth = sidecar_path(self.matrix["path"])
        return A, (read_eigenvalues(truth) if truth else None)


def oracle_max_error(eigenvalues, true_values, interval):
    """Largest eigenvalue error against the ground truth inside ``interval``.

    Returns ``inf`` when the number of reported eigenvalues differs from the
    true count.
    """
    interval = SearchInterval.coerce(interval)
    truth = np.sort(np.asarray(true_values)[interval.contains(true_values)])
    found = np.sort(np.asarray(eigenvalues))
    if found.size != truth.size:
        return math.inf
    if found.size == 0:
        return 0.0
    return float(np.max(np.abs(found - truth)))


@dataclass
class CellResult:
    cell: Cell
    converged: bool = False
    iterations: int = 0
    rhs_solved: int = 0
    final_residual: float = math.nan
    oracle_max_err: float = None
    trace: ConvergenceTrace = field(default_factory=ConvergenceTrace)
    eigenvalues: np.ndarray = None
    error: str = None

    def row(self):
        def fmt(x):
            return "" if x is None else f"{x:.16e}"

        return (
            self.cell.algo,
            str(self.cell.m0),
            str(self.cell.nc),
            str(self.cell.s),
            "error" if self.error else str(int(self.converged)),
            str(self.iterations),
            str(self.rhs_solved),
            fmt(self.final_residual),
            fmt(self.oracle_max_err),
        )


def run_cell(A, interval, cell, tol, max_iter, seed, true_values=None):
    """Run one solver cell; solver failures are captured, not raised."""
    config = SolverConfig(m0=cell.m0, n_c=cell.nc, s=cell.s, tol=tol, max_iter=max_iter, seed=seed)
    result = CellResult(cell)
    try:
        sol = solve(A, interval, config, cell.algo)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("cell %s failed: %s", cell.label, exc)
        result.error = f"{type(exc).__name__}: {exc}"
        return result
    result.converged = sol.converged
    result.iterations = sol.iterations
    result.rhs_solved = sol.accounting.rhs_solved
    result.final_residual = sol.trace[-1].max_residual if len(sol.trace) else math.nan
    result.trace = sol.trace
    result.eigenvalues = sol.eigenvalues
    if true_values is not None:
        result.oracle_max_err = oracle_max_error(sol.eigenvalues, true_values, interval)
    return result


class ComparisonReport:
    """One row per cell, ordered by the RHS count needed to reach the threshold."""

    def __init__(self, results, threshold):
        self.threshold = threshold
        keyed = [
            (r.trace.rhs_to_reach(threshold) if not r.error else math.inf, i, r)
            for i, r in enumerate(results)
        ]
        self.results = [r for _, _, r in sorted(keyed, key=lambda t: (t[0], t[1]))]

    def __len__(self):
        return len(self.results)

    def __iter__(self):
        return iter(self.results)

    def to_csv(self, fh=None):
        buf = io.StringIO() if fh is None else fh
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in self.results:
            writer.writerow(r.row())
        return buf.getvalue() if fh is None else None


def run_experiment(config, write=True):
    """Run every cell of ``config`` and optionally write the CSV outputs.

    Writes ``report.csv`` and ``trace_<idx>_<label>.csv`` per cell into
    ``config.output_dir``.  Cells run concurrently when ``config.jobs > 1``.
    """
    A, truth = config.load_problem()

    def task(cell):
        return run_cell(A, config.interval, cell, config.tol, config.max_iter, config.seed, truth)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(task, config.cells))
    else:
        results = [task(c) for c in config.cells]
    report = ComparisonReport(results, config.convergence_threshold)
    if write:
        os.makedirs(config.output_dir, exist_ok=True)
        for i, r in enumerate(results):
            name = f"trace_{i:02d}_{r.cell.label}.csv"
            atomic_write(os.path.join(config.output_dir, name), r.trace.to_csv())
        atomic_write(os.path.join(config.output_dir, "report.csv"), report.to_csv())
    return report
