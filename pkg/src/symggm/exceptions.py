"""Exception hierarchy.

The CLI maps these onto exit codes: validation problems exit with 2,
numerical failures with 3.
"""


class SymGGMError(Exception):
    """Base class for all package errors."""


class ColoringError(SymGGMError, ValueError):
    """A coloring description is malformed or inconsistent."""


class DataError(SymGGMError, ValueError):
    """Input data cannot be used (non-finite entries, too few rows, shape mismatch)."""


class NumericalError(SymGGMError, ArithmeticError):
    """A numerical precondition failed (non-PD curvature, singular matrix, ...)."""
