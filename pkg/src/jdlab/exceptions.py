"""Exception types raised across the package."""


class JDError(ValueError):
    """Base class for all errors raised by jdlab."""


class DimensionError(JDError):
    """Shapes of matrices or ensembles do not agree."""


class NotUnitaryError(JDError):
    """A matrix expected to be unitary fails the unitarity check."""


class DegenerateSpectraError(JDError):
    """Two diagonal indices are not separated by any matrix of the set."""


class DeterminantError(JDError):
    """A matrix expected to lie in SL(n) has determinant away from 1."""


class EliminationError(JDError):
    """Gaussian elimination met a column with no usable pivot."""


class AlignmentError(JDError):
    """Greedy assignment could not match every column."""
