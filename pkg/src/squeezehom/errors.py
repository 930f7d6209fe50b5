"""Exception types raised across the package."""


class SqueezehomError(Exception):
    """Base class for all package errors."""


class DomainError(SqueezehomError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InvalidArgumentError(SqueezehomError, ValueError):
    """Structurally invalid argument (empty input, bad count, out-of-range value)."""


class DegeneratePointError(SqueezehomError, ValueError):
    """A sample sits exactly at the origin, so its polar angle is undefined."""


class ConvergenceError(SqueezehomError, ArithmeticError):
    """Numerical quadrature did not reach the requested tolerance.

    The best estimate and its error bound are kept so callers can decide
    whether the result is still usable.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class FlatDistributionError(SqueezehomError, ValueError):
    """The phase distribution has no resolvable peak."""


class AmbiguousPeakError(SqueezehomError, ValueError):
    """Several bins tie for the maximum, so no single peak can be chosen."""


class BinningTooCoarseError(InvalidArgumentError):
    """The angular bin width cannot resolve the expected peak width."""


class OutputCollisionError(SqueezehomError, FileExistsError):
    """An output file already exists and overwriting was not requested."""
