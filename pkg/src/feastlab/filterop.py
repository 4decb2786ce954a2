"""Apply the quadrature spectral projector to a block of vectors.

Each quadrature node costs one dense complex LU factorization of ``zI - A``
and one block solve with ``p`` right-hand sides.  :class:`SolveAccounting`
tracks both totals; the right-hand-side count is the cost metric used when
comparing solver variants.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import threading
import warnings

import numpy as np
import scipy.linalg

from ._validation import check_block, check_symmetric_matrix
from .exceptions import FactorizationError

__all__ = [
    "SolveAccounting",
    "NodeFactorization",
    "factorize_node",
    "solve_node",
    "FactorizationCache",
    "apply_filter",
]

# |u_ii| below this fraction of max|u_ii| is treated as singular
PIVOT_RTOL = 1e-14


class SolveAccounting:
    """Cumulative linear-solve counters.

    Both counters only ever grow.  Updates from one :func:`apply_filter` call
    are applied together after every node has been solved, so a failed call
    leaves the counters untouched.
    """

    def __init__(self, rhs_solved=0, factorizations=0):
        self._lock = threading.Lock()
        self.rhs_solved = int(rhs_solved)
        self.factorizations = int(factorizations)

    def record(self, rhs, factorizations):
        if rhs < 0 or factorizations < 0:
            raise ValueError("accounting counters cannot decrease")
        with self._lock:
            self.rhs_solved += int(rhs)
            self.factorizations += int(factorizations)

    def snapshot(self):
        with self._lock:
            return SolveAccounting(self.rhs_solved, self.factorizations)

    def __eq__(self, other):
        if not isinstance(other, SolveAccounting):
            return NotImplemented
        return (self.rhs_solved, self.factorizations) == (
            other.rhs_solved,
            other.factorizations,
        )

    def __repr__(self):
        return (
            f"SolveAccounting(rhs_solved={self.rhs_solved}, "
            f"factorizations={self.factorizations})"
        )


@dataclass(frozen=True, eq=False)
class NodeFactorization:
    """LU factors of ``zI - A`` for one quadrature node."""

    z: complex
    lu: np.ndarray
    piv: np.ndarray
    node_index: int = -1

    @property
    def n(self):
        return self.lu.shape[0]


def factorize_node(A, z, node_index=-1):
    """Factor ``zI - A`` with partial pivoting.

    Raises :class:`FactorizationError` naming ``node_index`` when a pivot is
    numerically zero.
    """
    A = np.asarray(getattr(A, "entries", A))
    n = A.shape[0]
    M = -A.astype(np.complex128)
    M[np.diag_indices(n)] += z
    with warnings.catch_warnings():
        # exact singularity is reported below as FactorizationError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, overwrite_a=True, check_finite=False)
    diag = np.abs(np.diagonal(lu))
    scale = max(np.max(np.abs(A)) if A.size else 0.0, abs(z), 1.0)
    smallest = float(np.min(diag))
    if not np.isfinite(smallest) or smallest <= PIVOT_RTOL * scale:
        raise FactorizationError(node_index, complex(z), smallest)
    return NodeFactorization(complex(z), lu, piv, node_index)


def solve_node(fact, X):
    """Solve ``(zI - A) W = X`` with the stored factors; returns complex ``W``."""
    X = np.asarray(X)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[:, None]
    if X.shape[0] != fact.n:
        raise ValueError(f"block has {X.shape[0]} rows, factorization has {fact.n}")
    W = scipy.linalg.lu_solve(
        (fact.lu, fact.piv), X.astype(np.complex128), check_finite=False
    )
    return W[:, 0] if squeeze else W


class FactorizationCache:
    """Keeps node factorizations of one fixed matrix across filter calls.

    Reuse does not change the right-hand-side count, only the factorization
    count.
    """

    def __init__(self):
        self._store = {}
        self._lock = threading.Lock()

    def get(self, A, z, node_index):
        key = complex(z)
        with self._lock:
            fact = self._store.get(key)
        if fact is not None:
            return fact, False
        fact = factorize_node(A, z, node_index)
        with self._lock:
            self._store[key] = fact
        return fact, True

    def __len__(self):
        return len(self._store)


def apply_filter(A, rule, X, accounting=None, cache=None, workers=None):
    """Apply the approximate spectral projector: ``sum_k Re(w_k (z_k I - A)^-1 X)``.

    Parameters
    ----------
    A : array_like or SymmetricMatrix
        Dense real symmetric ``n x n`` matrix.
    rule : ContourRule
        Upper-half-plane nodes and weights.
    X : array_like
        ``n x p`` real block (a 1-D vector is treated as ``p = 1``).
    accounting : SolveAccounting, optional
        Incremented by ``n_c * p`` right-hand sides and one factorization per
        node actually computed.
    cache : FactorizationCache, optional
        Reuse factorizations across calls on the same ``A``.
    workers : int, optional
        Solve nodes in a thread pool.  Results are still summed in ascending
        node order, so the output is identical to the serial path.

    Returns
    -------
    ndarray
        Real ``n x p`` block.
    """
    A = check_symmetric_matrix(A)
    n = A.shape[0]
    X = check_block(X, n)
    p = X.shape[1]
    Xc = X.astype(np.complex128)

    def node_term(k):
        z, w = rule.nodes[k], rule.weights[k]
        if cache is None:
            fact, fresh = factorize_node(A, z, k), True
        else:
            fact, fresh = cache.get(A, z, k)
        return (w * solve_node(fact, Xc)).real, fresh

    if workers and workers > 1 and rule.n_c > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(node_term, range(rule.n_c)))
    else:
        results = [node_term(k) for k in range(rule.n_c)]

    Y = np.zeros((n, p))
    for term, _ in results:
        Y += term
    if accounting is not None:
        accounting.record(rule.n_c * p, sum(fresh for _, fresh in results))
    return Y
