"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems (bad inputs,
infeasible distributions, invalid schemes) exit with 2, numeric failures
(NaNs, quadrature breakdown) with 3.
"""


class CapacityError(Exception):
    """Base class for all package errors."""


class ConfigError(CapacityError):
    """Invalid configuration or input data."""


class DomainError(ConfigError):
    """Input violates an operation's precondition (infeasible distribution,
    wrong regime, empty grid)."""


class SchemeError(ConfigError):
    """Invalid phase-scheme parameters (pi/alpha must be a positive integer)."""


class NumericError(CapacityError):
    """Numeric failure (NaN input, non-finite intermediate)."""


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the best estimate and its error bound so callers can decide
    whether to proceed anyway.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
