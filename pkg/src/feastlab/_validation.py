"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np

SYMMETRY_RTOL = 1e-12


def check_interval(interval):
    """Return ``(lo, hi)`` as floats, requiring ``lo < hi`` and finite ends."""
    lo, hi = getattr(interval, "lo", None), getattr(interval, "hi", None)
    if lo is None:
        try:
            lo, hi = interval
        except (TypeError, ValueError):
            raise ValueError(
                f"interval must be a (lo, hi) pair, got {interval!r}"
            ) from None
    lo, hi = float(lo), float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"interval endpoints must be finite, got ({lo}, {hi})")
    if not lo < hi:
        raise ValueError(f"interval requires lo < hi, got ({lo}, {hi})")
    return lo, hi


def check_positive_int(value, name, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    if maximum is not None and value > maximum:
        raise ValueError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_symmetric_matrix(A, rtol=SYMMETRY_RTOL):
    """Validate a dense real symmetric matrix and return it as float64.

    Accepts a :class:`~feastlab.matmodel.SymmetricMatrix` or any array-like.
    The result is exactly symmetric: tiny asymmetries within ``rtol`` of the
    largest entry are removed by averaging with the transpose.
    """
    A = np.asarray(getattr(A, "entries", A))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square 2-D matrix, got shape {A.shape}")
    if A.shape[0] < 1:
        raise ValueError("matrix must have dimension n >= 1")
    if np.iscomplexobj(A):
        raise TypeError("only real symmetric matrices are supported")
    A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    asym = np.max(np.abs(A - A.T))
    if asym:
        scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
        if asym > rtol * scale:
            raise ValueError(
                f"matrix is not symmetric (max |A - A^T| = {asym:.3e})"
            )
        A = 0.5 * (A + A.T)
    return A


def check_block(X, n, name="X"):
    """Validate an ``n x p`` real block of column vectors (1-D means p=1)."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {X.shape}")
    if X.shape[0] != n:
        raise ValueError(
            f"{name} has {X.shape[0]} rows but the matrix has dimension {n}"
        )
    if X.shape[1] < 1:
        raise ValueError(f"{name} must have at least one column")
    if np.iscomplexobj(X):
        raise TypeError(f"{name} must be real")
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X
