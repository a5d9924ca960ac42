"""Problem parameters and scalar derived quantities.

The model equation is

    y u_yy + a u_y + Laplace_x u + u^alpha = 0,    (x, y) in R^n x [0, inf)

which behaves like the Lane-Emden equation in the non-integer effective
dimension ``N = n + 2a``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError

CRITICAL_TOL = 1e-12
RATIONAL_TOL = 1e-12

__all__ = [
    "ProblemParams",
    "GeneralizedParams",
    "Criticality",
    "CriticalityLabel",
    "critical_exponent",
    "tau",
    "classify",
    "aggregate",
    "half_integer_k",
]


def critical_exponent(n, a):
    """Return the critical exponent ``(n + 2a + 2) / (n + 2a - 2)``.

    Raises
    ------
    DomainError
        If ``n < 1`` or ``n + 2a <= 2`` (the denominator is not positive).
    """
    if n < 1:
        raise DomainError(f"tangential dimension must be >= 1, got {n}")
    N = n + 2.0 * a
    if N <= 2.0:
        raise DomainError(f"effective dimension n + 2a = {N} must exceed 2")
    return (N + 2.0) / (N - 2.0)


@dataclass(frozen=True)
class ProblemParams:
    """The triple ``(n, a, alpha)``.

    ``a > 1`` is enforced unless ``allow_weak_drift`` is set, in which case
    ``a >= 1/2`` is accepted (the range where the kernel and barrier lemmas
    still hold; also covers the integer-dimension lift ``a = k/2``).
    """

    n: int
    a: float
    alpha: float
    allow_weak_drift: bool = field(default=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "alpha", float(self.alpha))
        if not np.isfinite(self.a) or not np.isfinite(self.alpha):
            raise ParameterError("a and alpha must be finite")
        if self.allow_weak_drift:
            if self.a < 0.5:
                raise ParameterError(f"weak-drift gate requires a >= 1/2, got a={self.a}")
        elif self.a <= 1.0:
            raise ParameterError(f"a must exceed 1, got a={self.a}")
        if self.alpha <= 1.0:
            raise ParameterError(f"alpha must exceed 1, got alpha={self.alpha}")
        if self.effective_dimension <= 2.0:
            raise ParameterError(
                f"effective dimension n + 2a = {self.effective_dimension} must exceed 2"
            )

    @property
    def effective_dimension(self):
        return self.n + 2.0 * self.a

    @property
    def critical_exponent(self):
        return critical_exponent(self.n, self.a)

    @property
    def tau(self):
        return tau(self)

    @property
    def decay_order(self):
        """Homogeneity ``N - 2`` of the fundamental solution."""
        return self.effective_dimension - 2.0

    @classmethod
    def critical(cls, n, a, allow_weak_drift=False):
        """Parameters with alpha set to the critical exponent."""
        return cls(n, a, critical_exponent(n, a), allow_weak_drift=allow_weak_drift)

    def with_alpha(self, alpha):
        return ProblemParams(self.n, self.a, alpha, allow_weak_drift=self.allow_weak_drift)

    def to_dict(self):
        return {"n": self.n, "a": self.a, "alpha": self.alpha}


@dataclass(frozen=True)
class GeneralizedParams:
    """Parameters of the multi-variable equation

        sum_i y_i u_{y_i y_i} + sum_i a_i u_{y_i} + Laplace_x u + u^alpha = 0.
    """

    n: int
    a_vec: tuple
    alpha: float

    def __post_init__(self):
        a_vec = tuple(float(v) for v in np.atleast_1d(self.a_vec))
        object.__setattr__(self, "a_vec", a_vec)
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        if not a_vec:
            raise ParameterError("need at least one drift constant")
        if any(v <= 1.0 for v in a_vec):
            raise ParameterError(f"every a_i must exceed 1, got {a_vec}")
        if self.alpha <= 1.0:
            raise ParameterError(f"alpha must exceed 1, got {self.alpha}")

    @property
    def m(self):
        return len(self.a_vec)

    @property
    def a(self):
        return float(sum(self.a_vec))


def tau(params):
    """Weight exponent of the Kelvin-transformed equation, ``N + 2 - alpha (N - 2)``."""
    N = params.effective_dimension
    return N + 2.0 - params.alpha * (N - 2.0)


class CriticalityLabel(enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class Criticality:
    label: CriticalityLabel
    gap: float  # alpha - alpha_critical

    @property
    def is_critical(self):
        return self.label is CriticalityLabel.CRITICAL


def classify(params, tol=CRITICAL_TOL):
    gap = params.alpha - params.critical_exponent
    if abs(gap) <= tol:
        label = CriticalityLabel.CRITICAL
    elif gap < 0:
        label = CriticalityLabel.SUBCRITICAL
    else:
        label = CriticalityLabel.SUPERCRITICAL
    return Criticality(label, gap)


def aggregate(gparams):
    """Collapse a multi-variable problem to the single-variable one with ``a = sum a_i``."""
    return ProblemParams(gparams.n, gparams.a, gparams.alpha)


def half_integer_k(a, tol=RATIONAL_TOL):
    """Return ``k`` if ``a = k/2`` for a positive integer ``k`` (within ``tol``), else None."""
    k = round(2.0 * a)
    if k >= 1 and abs(2.0 * a - k) <= 2.0 * tol:
        return int(k)
    return None
