"""Exception types shared across the package."""


class HolocompError(Exception):
    """Base class for all package errors."""


class DomainError(HolocompError):
    """Input outside the mathematical domain of an operation."""


class AccuracyError(HolocompError):
    """Requested tolerance cannot be met; carries the error estimate."""

    def __init__(self, message, estimate):
        super().__init__(f"{message} (estimate {estimate:.3e})")
        self.estimate = estimate


class NumericalFailureError(HolocompError):
    """A solver produced a result that failed its residual gate."""


class BoundaryAmbiguityError(HolocompError):
    """A root landed too close to |z| = 1 to classify as inside or outside."""


class ConsistencyError(HolocompError):
    """Two independent estimators disagree beyond the allowed band."""


class UndefinedBoundError(HolocompError):
    """Every grid point was flagged, leaving no data to bound."""


class ConfigError(HolocompError):
    """A job config failed schema validation."""


class UnsupportedReportError(HolocompError):
    """The report carries no grid a renderer could draw."""
