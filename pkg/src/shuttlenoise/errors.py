"""Exception types raised across the package."""


class ShuttleNoiseError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(ShuttleNoiseError, ValueError):
    """A physical or numerical parameter violates its precondition."""


class DomainError(ShuttleNoiseError, ValueError):
    """An argument lies outside the domain where a function is defined."""


class SingularStateError(ShuttleNoiseError, ArithmeticError):
    """The Ermakov scaling factor reached rho <= 0."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NumericError(ShuttleNoiseError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    Carries the best estimate reached and its error bound so callers can
    decide whether the partial answer is still useful.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class ResolutionError(InvalidParameterError):
    """Time step too coarse for the noise correlation time or trap period."""


class NoCrossingError(ShuttleNoiseError, ValueError):
    """G1 - G2 does not change sign inside the search bracket."""


class ConfigError(ShuttleNoiseError, ValueError):
    """Invalid run configuration (CLI)."""
