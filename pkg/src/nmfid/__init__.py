"""Identifiability analysis for exact nonnegative matrix factorization."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DimensionError,
    GuardLimitError,
    InconsistentDecompositionError,
    InconsistentSystemError,
    InexactFactorizationError,
    NegativeEntryError,
    NmfidError,
    OffSimplexError,
    ParseError,
    RankDeficientError,
)
from .kernels import BACKEND  # noqa: E402
from .solve import (  # noqa: E402
    Factorization,
    RankBounds,
    SolveConfig,
    nmf_solve,
    nonneg_rank_bounds,
    verify_exact,
)

__all__ = [
    "BACKEND", "DimensionError", "Factorization", "GuardLimitError",
    "InconsistentDecompositionError", "InconsistentSystemError",
    "InexactFactorizationError", "NegativeEntryError", "NmfidError",
    "OffSimplexError", "ParseError", "RankBounds", "RankDeficientError",
    "SolveConfig", "__version__", "nmf_solve", "nonneg_rank_bounds", "verify_exact",
]
