"""Contour-integral interior eigensolvers (FEAST, XFEAST, RFEAST) for dense
real symmetric matrices, with a synthetic-spectrum test bench."""

__version__ = "0.1.0"

from .contour import (
    ContourRule,
    SearchInterval,
    build_contour_rule,
    filter_sweep,
    filter_value,
    gauss_legendre,
    predicted_rate,
)
from .drivers import (
    ConvergenceTrace,
    Solution,
    SolverConfig,
    feast_solve,
    make_initial_guess,
    rfeast_solve,
    solve,
    xfeast_solve,
)
from .estimator import FeastEigensolver, SpectralFilter
from .exceptions import (
    CholeskyError,
    FactorizationError,
    MatrixMarketError,
    RankCollapseError,
    SymmetryFieldError,
)
from .filterop import SolveAccounting, apply_filter, factorize_node, solve_node
from .matmodel import (
    EigenDecomposition,
    SpectrumLayout,
    SymmetricMatrix,
    assemble_matrix,
    generate_spectrum,
    read_matrix_market,
    true_count_in_interval,
    write_matrix_market,
)
from .ritz import (
    RitzSet,
    SelectionPolicy,
    compute_residual_block,
    count_inside,
    orthonormalize,
    rayleigh_ritz,
    select_pairs,
)

__all__ = [
    "__version__",
    "FeastEigensolver",
    "SpectralFilter",
    "SolveAccounting",
    "apply_filter",
    "factorize_node",
    "solve_node",
    "ContourRule",
    "SearchInterval",
    "build_contour_rule",
    "filter_sweep",
    "filter_value",
    "gauss_legendre",
    "predicted_rate",
    "ConvergenceTrace",
    "Solution",
    "SolverConfig",
    "feast_solve",
    "make_initial_guess",
    "rfeast_solve",
    "solve",
    "xfeast_solve",
    "CholeskyError",
    "FactorizationError",
    "MatrixMarketError",
    "RankCollapseError",
    "SymmetryFieldError",
    "EigenDecomposition",
    "SpectrumLayout",
    "SymmetricMatrix",
    "assemble_matrix",
    "generate_spectrum",
    "read_matrix_market",
    "true_count_in_interval",
    "write_matrix_market",
    "RitzSet",
    "SelectionPolicy",
    "compute_residual_block",
    "count_inside",
    "orthonormalize",
    "rayleigh_ritz",
    "select_pairs",
]
