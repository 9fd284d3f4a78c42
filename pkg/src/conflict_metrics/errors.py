class ConflictMetricsError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(ConflictMetricsError, ValueError):
    """An operation was called with inputs violating its precondition."""


class ConfigError(ConflictMetricsError, ValueError):
    """Invalid metric, policy or scenario configuration."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


class EmptyInteractionError(ConflictMetricsError, ValueError):
    """Two trajectories share no timesteps."""


class EmptyDistributionError(ConflictMetricsError, ValueError):
    """Aggregation was requested over zero interactions."""


class TrajectoryFormatError(ConflictMetricsError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
