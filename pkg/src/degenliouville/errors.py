"""Exception hierarchy shared by all modules."""


class DegenLiouvilleError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DegenLiouvilleError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ParameterError(DegenLiouvilleError, ValueError):
    """Invalid or inconsistent problem parameters."""


class PreconditionError(DegenLiouvilleError, ValueError):
    """A numerically checked precondition failed.

    ``worst`` holds the offending sample (point, value) when available.
    """

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class CoordinateError(DomainError):
    """A change of coordinates is singular at the requested point."""


class DegeneracyError(DegenLiouvilleError, ArithmeticError):
    """The degeneracy structure assumed near the boundary is violated."""


class FitError(DegenLiouvilleError, ArithmeticError):
    """A least-squares fit was rank deficient."""


class NumericError(DegenLiouvilleError, ArithmeticError):
    """Quadrature or root finding failed to converge."""


class ScanError(DegenLiouvilleError, RuntimeError):
    """A plane scan did not bracket a sign change of the reflection gap."""


class SolverError(DegenLiouvilleError, RuntimeError):
    """A linear solve failed or did not reach the requested residual."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class NonConvergenceError(SolverError):
    """Newton iteration diverged or stalled."""
