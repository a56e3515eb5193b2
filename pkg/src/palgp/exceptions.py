"""Exception and warning types shared across the package."""


class PalgpError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(PalgpError):
    """Array shapes are inconsistent with each other or with the design space."""


class NotPositiveDefiniteError(PalgpError):
    """A matrix required to be positive definite is not, even after jitter."""


class OutOfDomainError(PalgpError):
    """A point lies outside the design space beyond the clamping tolerance."""


class DegenerateDataError(PalgpError):
    """Data carries no usable signal for the requested operation."""


class EmptyReferenceError(PalgpError):
    """A reference set (or its restriction to a region) is empty."""


class EmptyCandidatesError(PalgpError):
    """No scoreable candidate points remain."""


class RegionTooSmallError(PalgpError):
    """Rejection sampling could not fill a candidate set inside a region."""


class OracleError(PalgpError):
    """An oracle failed to produce an observation."""


class OracleTimeoutError(OracleError):
    """An external oracle did not answer within the configured timeout."""


class NoSuchRecordError(OracleError):
    """A table-backed oracle has no record near the queried point."""


class UnsupportedOracleError(OracleError):
    """The oracle cannot provide the requested quantity (e.g. noise-free truth)."""


class MetricError(PalgpError):
    """A metric is undefined for the given data (e.g. relative error at y=0)."""


class ConfigError(PalgpError):
    """A configuration file is malformed, incomplete, or out of range."""


class DegenerateDataWarning(UserWarning):
    """Data is degenerate (e.g. constant observations); results use fallbacks."""
