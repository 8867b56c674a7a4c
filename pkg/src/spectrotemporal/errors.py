"""Exception types raised across the package."""


class SpectroTemporalError(Exception):
    """Base class for package errors."""


class UnsupportedConstellationError(SpectroTemporalError, ValueError):
    pass


class DimensionError(SpectroTemporalError, ValueError):
    """Array lengths or sample rates do not line up."""


class UndefinedMetricError(SpectroTemporalError, ValueError):
    pass


class NumericDivergenceError(SpectroTemporalError, FloatingPointError):
    """The phase solver produced non-finite values."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite values at solver iteration {iteration}")


class ConfigError(SpectroTemporalError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
