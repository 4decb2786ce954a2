"""Exception types raised by feastlab."""

from numpy.linalg import LinAlgError


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input.

    ``line`` holds the 1-based line number of the offending line, or None
    when the problem is not tied to a single line (e.g. missing entries).
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SymmetryFieldError(MatrixMarketError):
    """The header declares a symmetry other than ``symmetric``."""

    def __init__(self, field, line=1):
        self.field = field
        super().__init__(
            f"unexpected symmetry field {field!r} (expected 'symmetric')", line
        )


class FactorizationError(LinAlgError):
    """A shifted system ``zI - A`` is numerically singular."""

    def __init__(self, node_index, z, pivot):
        self.node_index = node_index
        self.z = z
        self.pivot = pivot
        super().__init__(
            f"factorization of zI - A failed at node {node_index} (z={z!r}): "
            f"smallest |pivot| = {pivot:.3e}"
        )


class CholeskyError(LinAlgError):
    """The reduced overlap matrix ``X'^T X'`` is not numerically SPD."""

    def __init__(self, smallest_pivot):
        self.smallest_pivot = smallest_pivot
        super().__init__(
            "reduced overlap matrix is not numerically positive definite "
            f"(smallest relative pivot {smallest_pivot:.3e}); orthonormalize "
            "the subspace first"
        )


class RankCollapseError(LinAlgError):
    """A subspace block lost (almost) all of its numerical rank."""
