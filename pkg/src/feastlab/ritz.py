"""Rayleigh-Ritz extraction and the pair-selection rules shared by the drivers."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._validation import check_block, check_positive_int, check_symmetric_matrix
from .contour import SearchInterval
from .exceptions import CholeskyError, RankCollapseError

__all__ = [
    "RitzSet",
    "SelectionPolicy",
    "orthonormalize",
    "rayleigh_ritz",
    "compute_residual_block",
    "select_pairs",
    "count_inside",
]

DROP_TOL = 1e-10
PIVOT_TOL = 1e-12
_REORTH_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RitzSet:
    """Ritz pairs from one extraction.

    ``vectors`` holds unit-norm Ritz vectors as columns; ``residuals`` holds
    the matching columns ``A x_k - lambda_k x_k``.
    """

    values: np.ndarray
    vectors: np.ndarray
    residual_norms: np.ndarray
    inside_flags: np.ndarray
    residuals: np.ndarray = None

    def __post_init__(self):
        k = len(self.values)
        if not (
            self.vectors.shape[1] == k
            and len(self.residual_norms) == k
            and len(self.inside_flags) == k
        ):
            raise ValueError("Ritz values, vectors, residuals and flags differ in length")

    def __len__(self):
        return len(self.values)

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.intp)
        return RitzSet(
            self.values[idx],
            self.vectors[:, idx],
            self.residual_norms[idx],
            self.inside_flags[idx],
            None if self.residuals is None else self.residuals[:, idx],
        )

    @property
    def max_inside_residual(self):
        """Largest residual norm among inside pairs (0 when there are none)."""
        r = self.residual_norms[self.inside_flags]
        return float(r.max()) if r.size else 0.0


@dataclass(frozen=True)
class SelectionPolicy:
    target_count: int
    interval: SearchInterval

    def __post_init__(self):
        check_positive_int(self.target_count, "target_count")
        object.__setattr__(self, "interval", SearchInterval.coerce(self.interval))


def orthonormalize(X, drop_tol=DROP_TOL, method="svd"):
    """Orthonormal basis for the column span of ``X``.

    ``method="svd"`` diagonalizes the Gram matrix ``X^T X = V S^2 V^T`` and
    returns ``U = X V S^-1`` restricted to singular values above
    ``drop_tol * s_max``.  Directions whose singular values sit near the
    Gram matrix's roundoff floor come out of that formula with a loss of
    orthogonality, so a second pass is made whenever ``U^T U`` misses the
    identity by more than 1e-12; that pass also drops directions whose squared
    singular value is at the Gram matrix's roundoff level.  ``method="qr"`` uses column-pivoted QR
    with the same relative cutoff on ``|R_ii|``.

    Returns
    -------
    U : ndarray, shape (n, rank)
    rank : int

    Raises
    ------
    RankCollapseError
        Every singular value falls below the cutoff.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError(f"expected a nonempty n x p block, got shape {X.shape}")
    if method == "qr":
        Q, R, _ = scipy.linalg.qr(X, mode="economic", pivoting=True)
        d = np.abs(np.diagonal(R))
        if d.size == 0 or not d[0] > 0:
            raise RankCollapseError("block is numerically zero")
        rank = int(np.count_nonzero(d > drop_tol * d[0]))
        return Q[:, :rank], rank
    if method != "svd":
        raise ValueError(f"unknown orthogonalization method {method!r}")
    U = _gram_svd(X, drop_tol)
    if np.max(np.abs(U.T @ U - np.eye(U.shape[1]))) > _REORTH_TOL:
        # U's genuine directions now have unit scale, so anything at the Gram
        # matrix's roundoff level is a dependent direction and is dropped too
        U = _gram_svd(U, drop_tol, floor=U.shape[1] * np.finfo(float).eps)
    return U, U.shape[1]


def _gram_svd(X, drop_tol, floor=0.0):
    s2, V = np.linalg.eigh(X.T @ X)
    s2, V = s2[::-1], V[:, ::-1]
    if not s2[0] > 0:
        raise RankCollapseError("block is numerically zero")
    keep = s2 > max(drop_tol * drop_tol, floor) * s2[0]
    if not np.any(keep):
        raise RankCollapseError("all singular values below the drop tolerance")
    sigma = np.sqrt(s2[keep])
    return (X @ V[:, keep]) / sigma


def rayleigh_ritz(A, X, interval, pivot_tol=PIVOT_TOL):
    """Ritz pairs of ``A`` on the span of ``X``.

    Solves ``A' q = lambda B' q`` with ``A' = X^T A X`` and ``B' = X^T X`` by
    Cholesky reduction ``B' = L L^T``.  Ritz vectors ``x_k = X q_k`` are
    normalized to unit length and returned with ascending Ritz values.

    Raises
    ------
    CholeskyError
        ``B'`` is not numerically positive definite: Cholesky fails, or the
        smallest squared pivot is below ``pivot_tol`` times the largest
        diagonal entry of ``B'``.
    """
    A = check_symmetric_matrix(A)
    X = check_block(X, A.shape[0])
    interval = SearchInterval.coerce(interval)

    AX = A @ X
    Ar = X.T @ AX
    Ar = 0.5 * (Ar + Ar.T)
    Br = X.T @ X
    Br = 0.5 * (Br + Br.T)
    scale = np.max(np.diagonal(Br))
    if not scale > 0:
        raise CholeskyError(0.0)
    try:
        L = scipy.linalg.cholesky(Br, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise CholeskyError(float(np.linalg.eigvalsh(Br)[0] / scale)) from None
    pivots = np.diagonal(L) ** 2 / scale
    if not np.all(np.isfinite(pivots)) or pivots.min() < pivot_tol:
        raise CholeskyError(float(pivots.min()))

    tmp = scipy.linalg.solve_triangular(L, Ar, lower=True, check_finite=False)
    C = scipy.linalg.solve_triangular(L, tmp.T, lower=True, check_finite=False)
    C = 0.5 * (C + C.T)
    theta, Y = np.linalg.eigh(C)
    q = scipy.linalg.solve_triangular(L.T, Y, lower=False, check_finite=False)

    vectors = X @ q
    norms = np.linalg.norm(vectors, axis=0)
    vectors /= norms
    q /= norms
    R = AX @ q - vectors * theta
    return RitzSet(
        values=theta,
        vectors=vectors,
        residual_norms=np.linalg.norm(R, axis=0),
        inside_flags=interval.contains(theta),
        residuals=R,
    )


def compute_residual_block(A, ritz):
    """Columns ``A x_k - lambda_k x_k`` recomputed from scratch."""
    A = check_symmetric_matrix(A)
    return A @ ritz.vectors - ritz.vectors * ritz.values


def _ranking(ritz, idx, center):
    idx = np.asarray(idx, dtype=np.intp)
    # primary: residual, secondary: distance from the interval center
    order = np.lexsort((np.abs(ritz.values[idx] - center), ritz.residual_norms[idx]))
    return idx[order]


def select_pairs(ritz, policy):
    """Pick at most ``policy.target_count`` pairs for the next iterate.

    All inside pairs come first; if there are more than the target, the ones
    with the smallest residuals are kept.  Remaining slots are filled from the
    outside pairs, lowest residual first.  Equal residuals are ordered by
    distance from the interval center.
    """
    m0 = policy.target_count
    center = policy.interval.center
    inside = policy.interval.contains(ritz.values)
    chosen = _ranking(ritz, np.flatnonzero(inside), center)[:m0]
    if chosen.size < m0:
        extra = _ranking(ritz, np.flatnonzero(~inside), center)[: m0 - chosen.size]
        chosen = np.concatenate([chosen, extra])
    return ritz.take(chosen)


def count_inside(ritz, interval=None):
    """Number of pairs flagged inside (re-evaluated if ``interval`` is given)."""
    if interval is None:
        return int(np.count_nonzero(ritz.inside_flags))
    return int(np.count_nonzero(SearchInterval.coerce(interval).contains(ritz.values)))
