"""Exception hierarchy shared by every nmfid module."""


class NmfidError(Exception):
    """Base class for all library errors."""


class ParseError(NmfidError, ValueError):
    """A matrix file or literal could not be parsed."""


class DimensionError(NmfidError, ValueError):
    """Operand shapes are incompatible."""


class NegativeEntryError(NmfidError, ValueError):
    """A matrix that must be nonnegative has a negative entry."""


class InexactFactorizationError(NmfidError, ValueError):
    """A factorization does not reproduce its target within tolerance."""


class GuardLimitError(NmfidError, RuntimeError):
    """A combinatorial enumeration would exceed its configured limit."""


class InconsistentSystemError(NmfidError, ValueError):
    """An exact linear system has no solution."""


class RankDeficientError(NmfidError, ValueError):
    """A matrix required to have full column rank does not."""


class InconsistentDecompositionError(NmfidError, ValueError):
    """A block decomposition does not match the model it is applied to."""


class OffSimplexError(NmfidError, ValueError):
    """A redistribution vector is not a point of the standard simplex."""
