"""Exception taxonomy shared across the package.

Two branches matter for the CLI: ConfigError maps to exit code 2,
DataError (and subclasses) to exit code 3.
"""


class AuditError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(AuditError):
    """Unusable run parameters or malformed configuration."""


class DataError(AuditError):
    """Malformed, inconsistent, or degenerate input data."""


class DimensionError(DataError):
    """Shapes of the supplied arrays do not agree."""


class NumericError(DataError):
    """Non-finite values or a numerically impossible operation."""


class SingularMatrixError(NumericError):
    """A matrix that must be positive definite failed to factor.

    ``pivot`` is the 1-based index of the leading minor that is not
    positive definite, as reported by the Cholesky factorization.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class DegenerateDataError(DataError):
    """The data carries no usable variation signal (covariance collapse)."""


class ParseError(DataError):
    """A text input file could not be parsed; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class TooFewSamplesError(DataError):
    """An operation needs more samples than the class provides."""


class TooFewClassesError(ConfigError):
    """An operation needs more classes than the dataset provides."""
