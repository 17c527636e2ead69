"""Exception types raised by the simulator."""

from __future__ import annotations


class HypNLSError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HypNLSError, ValueError):
    """Invalid grid, model or solver configuration."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class InvalidParameterError(HypNLSError, ValueError):
    """A numeric argument lies outside its admissible range."""


class ShapeError(HypNLSError, ValueError):
    """A field does not match the grid it is used with."""


class AccuracyError(HypNLSError, ArithmeticError):
    """A quadrature failed to reach its target accuracy.

    Attributes
    ----------
    residual : float
        The best residual that was achieved.
    """

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class DivergentKernelError(HypNLSError, ValueError):
    """The kernel at t = 0 without mollification is a delta distribution."""


class DegenerateInputError(HypNLSError, ValueError):
    """A ratio or norm is undefined for the given (typically zero) input."""


class ContaminatedRunError(HypNLSError, RuntimeError):
    """Too much mass reached the truncation boundary; enlarge r_max."""

    def __init__(self, message: str, boundary_fraction: float, time: float):
        super().__init__(message)
        self.boundary_fraction = boundary_fraction
        self.time = time


class ResolutionError(HypNLSError, ValueError):
    """Snapshots are too sparse in time for a diagnostic."""


class RangeError(HypNLSError, ValueError):
    """A requested time lies outside the trajectory."""


class UnsupportedDimensionError(HypNLSError, ValueError):
    """The operation is only implemented for specific dimensions."""
