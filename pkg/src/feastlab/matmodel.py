"""Synthetic symmetric test matrices with prescribed spectra, and Matrix Market I/O.

A test problem is built in two steps: :func:`generate_spectrum` turns a
:class:`SpectrumLayout` into an :class:`EigenDecomposition` (sorted eigenvalues
plus a seeded random orthogonal eigenbasis), and :func:`assemble_matrix`
multiplies it out into a dense :class:`SymmetricMatrix`.  The decomposition is
kept as the ground-truth oracle for solver checks.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_interval, check_positive_int, check_symmetric_matrix
from ._io import atomic_write
from .exceptions import MatrixMarketError, SymmetryFieldError

__all__ = [
    "SymmetricMatrix",
    "SpectrumLayout",
    "EigenDecomposition",
    "random_orthogonal",
    "place_values",
    "generate_spectrum",
    "decomposition_from_values",
    "assemble_matrix",
    "true_count_in_interval",
    "read_matrix_market",
    "write_matrix_market",
    "read_eigenvalues",
    "write_eigenvalues",
]

PLACEMENTS = ("uniform", "midpoint", "clustered")


class SymmetricMatrix:
    """Dense real symmetric matrix with exactly symmetric, read-only entries."""

    __slots__ = ("_entries",)

    def __init__(self, entries):
        A = check_symmetric_matrix(entries).copy()
        A.flags.writeable = False
        self._entries = A

    @property
    def entries(self):
        return self._entries

    @property
    def n(self):
        return self._entries.shape[0]

    @property
    def shape(self):
        return self._entries.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries
        return self._entries.astype(dtype)

    def __matmul__(self, other):
        return self._entries @ other

    def __eq__(self, other):
        if not isinstance(other, SymmetricMatrix):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash(self._entries.tobytes())

    def __repr__(self):
        return f"SymmetricMatrix(n={self.n})"


@dataclass(frozen=True)
class SpectrumLayout:
    """Where the eigenvalues of a synthetic test matrix go.

    ``inside_count`` values are placed in ``inside_interval`` using
    ``inside_placement`` and ``outside_count`` values in ``outside_interval``
    using ``placement``.

    Placements:

    ``uniform``
        equally spaced, both interval endpoints included.
    ``midpoint``
        centers of equal-width cells, so every value is strictly interior.
    ``clustered`` (outside only)
        ``num_clusters`` equal-count groups of width ``cluster_width`` whose
        centers are equally spaced so that every group fits in the interval.
    """

    n: int
    inside_interval: tuple
    inside_count: int
    outside_interval: tuple = (1.0, 2.0)
    outside_count: int = 0
    placement: str = "uniform"
    num_clusters: int = 1
    cluster_width: float = 0.0
    inside_placement: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.inside_count, "inside_count")
        if self.outside_count < 0:
            raise ValueError("outside_count must be >= 0")
        if self.inside_count + self.outside_count != self.n:
            raise ValueError(
                f"inside_count + outside_count = "
                f"{self.inside_count + self.outside_count} != n = {self.n}"
            )
        ilo, ihi = check_interval(self.inside_interval)
        object.__setattr__(self, "inside_interval", (ilo, ihi))
        if self.outside_count:
            olo, ohi = check_interval(self.outside_interval)
            object.__setattr__(self, "outside_interval", (olo, ohi))
            if olo <= ihi and ilo <= ohi:
                raise ValueError(
                    f"inside interval {(ilo, ihi)} overlaps outside interval "
                    f"{(olo, ohi)}"
                )
        if self.placement not in PLACEMENTS:
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.inside_placement not in ("uniform", "midpoint"):
            raise ValueError(
                f"inside_placement must be 'uniform' or 'midpoint', "
                f"got {self.inside_placement!r}"
            )
        if self.placement == "clustered" and self.outside_count:
            check_positive_int(self.num_clusters, "num_clusters")
            width = self.outside_interval[1] - self.outside_interval[0]
            if not 0.0 <= self.cluster_width * self.num_clusters <= width:
                raise ValueError(
                    f"{self.num_clusters} clusters of width {self.cluster_width} "
                    f"do not fit in an outside range of width {width}"
                )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class EigenDecomposition:
    """Sorted eigenvalues and an orthogonal eigenvector matrix (columns)."""

    values: np.ndarray
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        vectors = np.array(self.vectors, dtype=np.float64)
        n = values.shape[0]
        if values.ndim != 1 or vectors.shape != (n, n):
            raise ValueError(
                f"need n values and an n x n basis, got {values.shape} and "
                f"{vectors.shape}"
            )
        if np.any(np.diff(values) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        ortho_err = np.max(np.abs(vectors.T @ vectors - np.eye(n)))
        if ortho_err > 1e-12:
            raise ValueError(f"eigenvector matrix is not orthogonal ({ortho_err:.2e})")
        values.flags.writeable = False
        vectors.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "vectors", vectors)

    @property
    def n(self):
        return self.values.shape[0]


def random_orthogonal(n, seed):
    """Seeded random orthogonal matrix.

    QR of a standard Gaussian matrix, with each column's sign flipped so its
    largest-magnitude entry is positive.
    """
    rng = np.random.default_rng(int(seed))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(n)])
    return Q * signs


def place_values(lo, hi, count, placement, num_clusters=1, cluster_width=0.0):
    """Place ``count`` values in ``[lo, hi]`` according to ``placement``."""
    if count == 0:
        return np.empty(0)
    if placement == "uniform":
        if count == 1:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, count)
    if placement == "midpoint":
        h = (hi - lo) / count
        return lo + h * (np.arange(count) + 0.5)
    if placement == "clustered":
        k = min(num_clusters, count)
        half = 0.5 * cluster_width
        if k == 1:
            centers = np.array([0.5 * (lo + hi)])
        else:
            centers = np.linspace(lo + half, hi - half, k)
        sizes = np.full(k, count // k)
        sizes[: count % k] += 1
        groups = [
            place_values(c - half, c + half, size, "uniform") if half else
            np.full(size, c)
            for c, size in zip(centers, sizes)
        ]
        return np.concatenate(groups)
    raise ValueError(f"unknown placement {placement!r}")


def decomposition_from_values(values, seed):
    """Pair arbitrary eigenvalues with a seeded random orthogonal basis."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    return EigenDecomposition(values, random_orthogonal(values.shape[0], seed))


def generate_spectrum(layout):
    """Build the eigen-decomposition described by ``layout``.

    Deterministic for a fixed ``layout.seed``.
    """
    inside = place_values(
        *layout.inside_interval, layout.inside_count, layout.inside_placement
    )
    outside = place_values(
        *layout.outside_interval,
        layout.outside_count,
        layout.placement,
        layout.num_clusters,
        layout.cluster_width,
    )
    return decomposition_from_values(np.concatenate([inside, outside]), layout.seed)


def assemble_matrix(decomp):
    """Return ``Q diag(values) Q^T`` as a :class:`SymmetricMatrix`."""
    Q = decomp.vectors
    A = (Q * decomp.values) @ Q.T
    return SymmetricMatrix(0.5 * (A + A.T))


def true_count_in_interval(decomp, interval):
    """Number of eigenvalues in the open interval ``(lo, hi)``."""
    lo, hi = check_interval(interval)
    values = getattr(decomp, "values", decomp)
    values = np.asarray(values)
    return int(np.count_nonzero((values > lo) & (values < hi)))


# -- Matrix Market ---------------------------------------------------------

_BANNER = "%%matrixmarket"


def _data_lines(lines, start):
    for lineno, line in enumerate(lines[start:], start=start + 1):
        stripped = line.strip()
        if stripped and not stripped.startswith("%"):
            yield lineno, stripped


def _parse_floats(text, lineno, count):
    parts = text.split()
    if len(parts) != count:
        raise MatrixMarketError(
            f"expected {count} fields, found {len(parts)}: {text!r}", lineno
        )
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise MatrixMarketError(f"cannot parse number in {text!r}", lineno) from None


def read_matrix_market(path):
    """Read a real symmetric Matrix Market file (coordinate or array).

    Raises
    ------
    SymmetryFieldError
        The header symmetry field is not ``symmetric``.
    MatrixMarketError
        Any other format violation; carries the offending line number.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != _BANNER:
        raise MatrixMarketError(f"bad header {lines[0]!r}", 1)
    obj, fmt, fld, sym = (h.lower() for h in header[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", 1)
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1)
    if fld not in ("real", "double", "integer"):
        raise MatrixMarketError(f"unsupported field {fld!r} (need real)", 1)
    if sym != "symmetric":
        raise SymmetryFieldError(header[4], 1)

    data = _data_lines(lines, 1)
    try:
        lineno, size_line = next(data)
    except StopIteration:
        raise MatrixMarketError("missing size line", len(lines)) from None

    if fmt == "coordinate":
        rows, cols, nnz = (int(v) for v in _parse_ints(size_line, lineno, 3))
        if rows != cols:
            raise MatrixMarketError(f"symmetric matrix must be square, got {rows}x{cols}", lineno)
        A = np.zeros((rows, rows))
        seen = 0
        for lineno, text in data:
            parts = text.split()
            if len(parts) != 3:
                raise MatrixMarketError(f"expected 'i j value', got {text!r}", lineno)
            i, j = _parse_ints(" ".join(parts[:2]), lineno, 2)
            (v,) = _parse_floats(parts[2], lineno, 1)
            if not (1 <= i <= rows and 1 <= j <= rows):
                raise MatrixMarketError(f"index ({i}, {j}) out of range", lineno)
            if j > i:
                raise MatrixMarketError(
                    f"entry ({i}, {j}) is above the diagonal in a symmetric file",
                    lineno,
                )
            A[i - 1, j - 1] = v
            A[j - 1, i - 1] = v
            seen += 1
        if seen != nnz:
            raise MatrixMarketError(f"header declares {nnz} entries, found {seen}", len(lines))
    else:
        rows, cols = _parse_ints(size_line, lineno, 2)
        if rows != cols:
            raise MatrixMarketError(f"symmetric matrix must be square, got {rows}x{cols}", lineno)
        A = np.zeros((rows, rows))
        # column-major lower triangle
        slots = [(i, j) for j in range(rows) for i in range(j, rows)]
        k = 0
        for lineno, text in data:
            if k >= len(slots):
                raise MatrixMarketError("more values than the lower triangle holds", lineno)
            (v,) = _parse_floats(text, lineno, 1)
            i, j = slots[k]
            A[i, j] = A[j, i] = v
            k += 1
        if k != len(slots):
            raise MatrixMarketError(f"expected {len(slots)} values, found {k}", len(lines))
    if rows < 1:
        raise MatrixMarketError("matrix dimension must be >= 1", 2)
    return SymmetricMatrix(A)


def _parse_ints(text, lineno, count):
    parts = text.split()
    if len(parts) != count:
        raise MatrixMarketError(
            f"expected {count} integers, found {len(parts)}: {text!r}", lineno
        )
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise MatrixMarketError(f"cannot parse integer in {text!r}", lineno) from None


def write_matrix_market(matrix, path, fmt="coordinate", comment=None):
    """Write the lower triangle of ``matrix`` at 17 significant digits.

    ``fmt="coordinate"`` stores every lower-triangle entry, zeros included,
    so dense test matrices survive a round trip unchanged.
    """
    A = check_symmetric_matrix(matrix)
    n = A.shape[0]
    if fmt not in ("coordinate", "array"):
        raise ValueError(f"fmt must be 'coordinate' or 'array', got {fmt!r}")
    out = [f"%%MatrixMarket matrix {fmt} real symmetric"]
    if comment:
        out.extend(f"% {line}" for line in str(comment).splitlines())
    if fmt == "coordinate":
        rows, cols = np.tril_indices(n)
        order = np.lexsort((rows, cols))  # column-major
        rows, cols = rows[order], cols[order]
        out.append(f"{n} {n} {rows.size}")
        out.extend(
            f"{i + 1} {j + 1} {v:.16e}" for i, j, v in zip(rows, cols, A[rows, cols])
        )
    else:
        out.append(f"{n} {n}")
        out.extend(f"{A[i, j]:.16e}" for j in range(n) for i in range(j, n))
    atomic_write(path, "\n".join(out) + "\n")


def write_eigenvalues(values, path):
    """Ground-truth sidecar: sorted eigenvalues, one per line, 17 digits."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    atomic_write(path, "".join(f"{v:.16e}\n" for v in values))


def read_eigenvalues(path):
    values = np.loadtxt(path, dtype=np.float64, ndmin=1)
    return np.sort(values)

