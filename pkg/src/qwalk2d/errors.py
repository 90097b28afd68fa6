"""Exception types shared across the package."""


class QwalkError(Exception):
    """Base class for all package errors."""


class ConfigError(QwalkError, ValueError):
    """A run configuration value is invalid or inconsistent."""


class UnsupportedModeError(ConfigError):
    """The requested disorder mode is not supported by this engine."""


class AnalysisError(QwalkError, ValueError):
    """A fit or observable cannot be computed from the given data."""


class LatticeOverflowError(QwalkError, RuntimeError):
    """Amplitude would be shifted past the edge of the bounded grid."""


class PhaseCoverageError(QwalkError, RuntimeError):
    """A phase matrix does not cover the occupied sites of a state."""


class InvariantViolationError(QwalkError, RuntimeError):
    """A numerical invariant (norm, trace, normalization) drifted too far."""


class TrajectoryFailure(QwalkError, RuntimeError):
    """A trajectory inside an ensemble raised; the index is in the message."""
