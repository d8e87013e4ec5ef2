"""Exception types shared across the package."""


class AttractorForgeError(Exception):
    """Base class for all package errors."""


class InvalidFieldError(AttractorForgeError):
    """A field contains non-finite values or has the wrong shape."""


class GridMismatchError(AttractorForgeError):
    """Two fields that must share a grid do not."""


class ConfigError(AttractorForgeError):
    """Bad or inconsistent configuration (unknown keys, wrong regime, ...)."""


class AlignmentError(AttractorForgeError):
    """A time does not sit on the required uniform time grid."""


class RangeError(AttractorForgeError):
    """A requested time or window falls outside the available data."""


class SolverFailureError(AttractorForgeError):
    """Newton iteration failed to converge even after step halving."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class InternalError(AttractorForgeError):
    """An internal invariant was violated (e.g. an indefinite quadratic form)."""
