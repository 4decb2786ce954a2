"""scikit-learn style wrappers around the solvers and the block filter.

``FeastEigensolver().fit(A)`` computes the eigenpairs of ``A`` in an interval;
``transform`` then maps row vectors onto the computed eigenbasis.
``SpectralFilter().fit(A)`` stores the matrix and contour rule; ``transform``
applies the approximate spectral projector to row vectors, so it can sit in a
:class:`sklearn.pipeline.Pipeline` like any other transformer.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_interval, check_symmetric_matrix
from .contour import build_contour_rule
from .drivers import ALGORITHMS, SolverConfig, solve
from .filterop import SolveAccounting, apply_filter

__all__ = ["FeastEigensolver", "SpectralFilter"]


def _validate_operator(A):
    A = check_array(getattr(A, "entries", A), dtype=np.float64, ensure_2d=True)
    return check_symmetric_matrix(A)


class FeastEigensolver(BaseEstimator):
    """Interior eigensolver for dense real symmetric matrices.

    Parameters
    ----------
    interval : (float, float)
        Open search interval ``(lo, hi)``.
    algorithm : {"feast", "xfeast", "rfeast"}
    m0 : int
        Base subspace size; should exceed the number of eigenvalues in the
        interval.
    n_c : int
        Quadrature nodes on the half contour.
    s : int
        Stored blocks (xfeast) or Rayleigh-Ritz passes per filter step (rfeast).
    tol : float
        Stop when the largest in-interval residual norm is at most ``tol``.
    max_iter : int
    random_state : int
        Seed of the initial guess.
    orthogonalizer : {"svd", "qr"}

    Attributes
    ----------
    eigenvalues_ : ndarray of shape (m,)
    eigenvectors_ : ndarray of shape (n, m)
    residual_norms_ : ndarray of shape (m,)
    converged_ : bool
    n_iter_ : int
    rhs_solved_ : int
        Linear-system right-hand sides solved during the fit.
    trace_ : ConvergenceTrace
    n_features_in_ : int
    """

    def __init__(
        self,
        interval=(-1.0, 1.0),
        algorithm="feast",
        m0=10,
        n_c=8,
        s=1,
        tol=1e-12,
        max_iter=50,
        random_state=0,
        orthogonalizer="svd",
    ):
        self.interval = interval
        self.algorithm = algorithm
        self.m0 = m0
        self.n_c = n_c
        self.s = s
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state
        self.orthogonalizer = orthogonalizer

    def fit(self, A, y=None):
        A = _validate_operator(A)
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"algorithm must be one of {sorted(ALGORITHMS)}, got {self.algorithm!r}"
            )
        config = SolverConfig(
            m0=self.m0,
            n_c=self.n_c,
            s=self.s,
            tol=self.tol,
            max_iter=self.max_iter,
            seed=0 if self.random_state is None else self.random_state,
            orthogonalizer=self.orthogonalizer,
        )
        sol = solve(A, check_interval(self.interval), config, self.algorithm)
        self.eigenvalues_ = sol.eigenvalues
        self.eigenvectors_ = sol.eigenvectors
        self.residual_norms_ = sol.residual_norms
        self.converged_ = sol.converged
        self.n_iter_ = sol.iterations
        self.rhs_solved_ = sol.accounting.rhs_solved
        self.trace_ = sol.trace
        self.n_features_in_ = A.shape[0]
        return self

    def _check_rows(self, X):
        check_is_fitted(self, "eigenvectors_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but the solver was fitted on a "
                f"{self.n_features_in_} x {self.n_features_in_} matrix"
            )
        return X

    def transform(self, X):
        """Coefficients of each row of ``X`` in the computed eigenbasis."""
        return self._check_rows(X) @ self.eigenvectors_

    def inverse_transform(self, Z):
        check_is_fitted(self, "eigenvectors_")
        Z = check_array(Z, dtype=np.float64)
        return Z @ self.eigenvectors_.T


class SpectralFilter(TransformerMixin, BaseEstimator):
    """Approximate spectral projector of a fitted matrix, applied to rows."""

    def __init__(self, interval=(-1.0, 1.0), n_c=8):
        self.interval = interval
        self.n_c = n_c

    def fit(self, A, y=None):
        self.matrix_ = _validate_operator(A)
        self.rule_ = build_contour_rule(check_interval(self.interval), self.n_c)
        self.accounting_ = SolveAccounting()
        self.n_features_in_ = self.matrix_.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "rule_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return apply_filter(self.matrix_, self.rule_, X.T, self.accounting_).T
