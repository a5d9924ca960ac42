"""Numerics for the degenerate semilinear equation ``y u_yy + a u_y + Laplace_x u + u^alpha = 0``
on the upper half-space: exact bubbles, coordinate transforms, boundary ratios,
finite differences, moving planes and weighted norms."""

from .errors import (
    CoordinateError,
    DegeneracyError,
    DegenLiouvilleError,
    DomainError,
    FitError,
    NonConvergenceError,
    NumericError,
    ParameterError,
    PreconditionError,
    ScanError,
    SolverError,
)
from .params import GeneralizedParams, ProblemParams, classify, critical_exponent

__version__ = "0.1.0"

__all__ = [
    "CoordinateError",
    "DegeneracyError",
    "DegenLiouvilleError",
    "DomainError",
    "FitError",
    "GeneralizedParams",
    "NonConvergenceError",
    "NumericError",
    "ParameterError",
    "PreconditionError",
    "ProblemParams",
    "ScanError",
    "SolverError",
    "classify",
    "critical_exponent",
]
