"""Exception types shared across the package."""


class DynevtError(Exception):
    """Base class for all package errors."""


class DataError(DynevtError):
    """Malformed, inconsistent, or insufficient input data."""


class FitError(DynevtError):
    """An estimator could not produce a usable fit."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BrtSearchError(FitError):
    """No admissible break-even threshold candidate for a date."""


class AlignmentError(DynevtError):
    """Two dated series do not line up where they must."""
