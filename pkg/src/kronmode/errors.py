"""Exception types shared across the package."""


class KronmodeError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(KronmodeError, ValueError):
    """Operand shapes or extents are inconsistent."""


class InvalidDirectionError(KronmodeError, ValueError):
    """A 1-based direction index lies outside 1..d."""


class SingularMatrixError(KronmodeError, ValueError):
    """A linear solve hit a numerically singular matrix."""


class InvalidInputError(KronmodeError, ValueError):
    """An input contains non-finite or otherwise unusable values."""


class ConfigurationError(KronmodeError, ValueError):
    """An unsupported parameter combination was requested."""


class InvalidGridError(KronmodeError, ValueError):
    """Grid nodes are repeated or not strictly increasing."""


class InvalidPotentialError(KronmodeError, ValueError):
    """A potential evaluates to a non-finite value at a quadrature node."""


class OracleSizeError(KronmodeError, ValueError):
    """A dense test-oracle assembly exceeds its configured size cap."""


class InvalidReferenceError(KronmodeError, ValueError):
    """A relative error was requested against a zero-norm reference."""


class NoConvergenceError(KronmodeError, RuntimeError):
    """An iterative scheme exhausted its budget before meeting its tolerance.

    Carries the best error estimate seen so far in ``best_estimate``.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
