"""Quadrature on a circular contour around a real search interval.

The rational filter induced by an ``n_c``-point rule is::

    rho(lam) = sum_k Re( w_k / (z_k - lam) )

with the nodes ``z_k`` on the upper half of the circle through the interval
endpoints.  Because ``A`` is real symmetric, the lower half of the contour
contributes the complex conjugate of the upper half, so only upper-half nodes
are stored and the real part accounts for both halves.
"""

from dataclasses import dataclass
import csv
import io

import numpy as np

from ._validation import check_interval, check_positive_int

__all__ = [
    "MAX_NODES",
    "SearchInterval",
    "ContourRule",
    "gauss_legendre",
    "build_contour_rule",
    "filter_value",
    "filter_sweep",
    "sweep_to_csv",
    "predicted_rate",
    "rank_by_filter",
]

MAX_NODES = 64


@dataclass(frozen=True)
class SearchInterval:
    """Open real interval ``(lo, hi)`` whose eigenpairs are wanted."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = check_interval((self.lo, self.hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def coerce(cls, interval):
        if isinstance(interval, cls):
            return interval
        return cls(*check_interval(interval))

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self):
        return 0.5 * (self.hi - self.lo)

    def contains(self, values):
        """Elementwise open-interval membership."""
        values = np.asarray(values)
        return (values > self.lo) & (values < self.hi)


@dataclass(frozen=True, eq=False)
class ContourRule:
    """Upper-half-plane quadrature nodes and weights for one interval.

    Built by :func:`build_contour_rule`; other rules (trapezoidal, Zolotarev,
    ...) can be supplied directly as node/weight arrays as long as every node
    lies strictly above the real axis.
    """

    interval: SearchInterval
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        interval = SearchInterval.coerce(self.interval)
        nodes = np.array(self.nodes, dtype=np.complex128).ravel()
        weights = np.array(self.weights, dtype=np.complex128).ravel()
        if nodes.size == 0 or nodes.shape != weights.shape:
            raise ValueError("need the same nonzero number of nodes and weights")
        if np.any(nodes.imag <= 0):
            raise ValueError("all contour nodes must lie in the upper half-plane")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "interval", interval)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n_c(self):
        return self.nodes.size

    @property
    def center(self):
        return self.interval.center

    @property
    def radius(self):
        return self.interval.radius

    def __call__(self, lam):
        return filter_value(self, lam)

    def __repr__(self):
        return (
            f"ContourRule(interval=({self.interval.lo}, {self.interval.hi}), "
            f"n_c={self.n_c})"
        )


def gauss_legendre(n):
    """Gauss-Legendre abscissae and weights on ``(-1, 1)``.

    Newton iteration on the three-term Legendre recurrence, started from
    Chebyshev-type initial guesses.  Abscissae are returned ascending and are
    exactly antisymmetric; weights are exactly symmetric.

    Parameters
    ----------
    n : int
        Number of points, ``1 <= n <= 64``.

    Returns
    -------
    x, w : ndarray
    """
    n = check_positive_int(n, "n", MAX_NODES)
    m = (n + 1) // 2
    k = np.arange(1, m + 1)
    # roots in descending order, positive half only
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p0, p1 = np.ones_like(x), x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    # derivative at the converged roots
    p0, p1 = np.ones_like(x), x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    if n % 2:
        x[-1] = 0.0
        xs = np.concatenate([-x, x[-2::-1]])
        ws = np.concatenate([w, w[-2::-1]])
    else:
        xs = np.concatenate([-x, x[::-1]])
        ws = np.concatenate([w, w[::-1]])
    return xs, ws


def build_contour_rule(interval, n_c):
    """Gauss-Legendre rule on the upper semicircle through the interval ends.

    With center ``c`` and radius ``r`` of the interval, and Gauss points
    ``g_k``/``w_k``::

        theta_k = (pi/2) (g_k + 1)
        z_k     = c + r exp(i theta_k)
        omega_k = (w_k / 2) r exp(i theta_k)
    """
    interval = SearchInterval.coerce(interval)
    n_c = check_positive_int(n_c, "n_c", MAX_NODES)
    g, w = gauss_legendre(n_c)
    c, r = interval.center, interval.radius
    e = np.exp(1j * (0.5 * np.pi) * (g + 1.0))
    return ContourRule(interval, c + r * e, 0.5 * w * r * e)


def filter_value(rule, lam):
    """Rational filter ``rho(lam)`` for real ``lam`` (scalar or array)."""
    lam = np.asarray(lam, dtype=np.float64)
    if not np.all(np.isfinite(lam)):
        raise ValueError("filter_value requires finite lambda")
    terms = rule.weights / (rule.nodes - lam[..., None])
    # ascending node order, same as the block filter
    out = np.zeros(lam.shape)
    for k in range(rule.n_c):
        out = out + terms[..., k].real
    return out if out.ndim else float(out)


def filter_sweep(rule, lam_lo, lam_hi, points):
    """Sample ``rho`` on ``points`` equally spaced values of ``[lam_lo, lam_hi]``.

    Returns an array of shape ``(points, 2)`` with columns ``lambda, rho``.
    """
    if not lam_lo < lam_hi:
        raise ValueError(f"sweep requires lam_lo < lam_hi, got ({lam_lo}, {lam_hi})")
    if points < 2:
        raise ValueError(f"sweep needs at least 2 points, got {points}")
    lam = np.linspace(lam_lo, lam_hi, int(points))
    return np.column_stack([lam, filter_value(rule, lam)])


def sweep_to_csv(sweep, fh=None):
    """Write sweep rows as ``lambda,rho`` CSV; returns the text if ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "rho"])
    for lam, rho in sweep:
        writer.writerow([f"{lam:.16e}", f"{rho:.16e}"])
    if fh is None:
        return buf.getvalue()
    return None


def rank_by_filter(rule, spectrum):
    """Eigenvalues reordered by descending ``|rho|``, with their ``rho`` values.

    The filter dips below zero outside the interval and subspace iteration
    amplifies by magnitude, so ranking is on ``|rho|``.  Ties keep ascending
    eigenvalue order (stable sort).
    """
    spectrum = np.sort(np.asarray(spectrum, dtype=np.float64))
    rho = np.atleast_1d(filter_value(rule, spectrum))
    order = np.argsort(-np.abs(rho), kind="stable")
    return spectrum[order], rho[order]


def predicted_rate(rule, spectrum, m0, index=None):
    """Predicted per-iteration error contraction of FEAST.

    Eigenvalues are ranked by descending ``|rho|``.  The result is
    ``|rho(lam_{m0+1})| / |rho(lam_index)|`` (1-based ranks), i.e. how much the
    error in the ``index``-th best-filtered eigenvector shrinks per iteration
    with a subspace of size ``m0``.  ``index`` defaults to ``m0``, the worst
    pair the subspace can hold; pass the true in-interval count to get the
    rate of the slowest wanted pair.
    """
    m0 = check_positive_int(m0, "m0")
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if m0 >= spectrum.size:
        raise ValueError(f"m0 = {m0} must be smaller than the spectrum size {spectrum.size}")
    index = m0 if index is None else check_positive_int(index, "index", m0)
    _, rho = rank_by_filter(rule, spectrum)
    return abs(rho[m0]) / abs(rho[index - 1])
