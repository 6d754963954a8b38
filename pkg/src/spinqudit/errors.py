"""Exception taxonomy.

The CLI maps these categories onto distinct exit codes, so library code
should raise the most specific class that applies.
"""

from __future__ import annotations


class SpinQuditError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpinError(SpinQuditError, ValueError):
    """Spin quantum number is not a non-negative half-integer."""


class DomainError(SpinQuditError, ValueError):
    """An argument is outside its physical domain (e.g. T <= 0)."""


class ValidationError(SpinQuditError, ValueError):
    """A value object violates one of its structural invariants."""


class ConfigError(SpinQuditError, ValueError):
    """Configuration text is malformed, has unknown keys, or bad values."""


class DataError(SpinQuditError, ValueError):
    """An input data file is missing, malformed, or inconsistent."""


class DataRangeError(DataError):
    """A lookup fell outside the tabulated range (no extrapolation)."""


class FitError(SpinQuditError, RuntimeError):
    """Nonlinear fit failed to converge.

    Carries the best parameter set reached so far in ``best`` so callers
    can inspect or report it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CoarseGridWarning(UserWarning):
    """A resonance may have been missed because the field grid is too coarse."""
