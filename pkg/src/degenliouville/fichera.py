"""Boundary ratio ``g``, the admissible exponent window and the ``A^22`` factorization.

For an operator ``a^{ij} d_ij u + b^i d_i u + f`` on ``{phi > 0}`` whose
principal part degenerates on ``{phi = 0}``,

    g(x) = (b^i phi_i - d_j a^{ij} phi_i) / (d_k(a^{ij} phi_i phi_j) phi^k),
    phi^k = phi_k / |grad phi|^2.

The numerator is the Fichera number.  With ``a = sup g + 1`` the nonlinearity
exponent must lie in ``(1, (3 + 2a) / (2a - 1))``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DegeneracyError, NumericError
from .fields import as_points
from .operator_field import (
    OperatorField,
    model_operator,
    perturbed_model,
    polynomial_operator,
    rotated,
    scaled_phi,
)
from .transforms import boundary_flatten

__all__ = [
    "OperatorField",
    "FicheraReport",
    "Lemma41Report",
    "model_operator",
    "perturbed_model",
    "polynomial_operator",
    "rotated",
    "scaled_phi",
    "boundary_samples",
    "fichera_ratio",
    "window_upper",
    "exponent_window",
    "a22_factor",
    "lemma41_check",
]

BISECT_XTOL = 1e-12


def fichera_ratio(op: OperatorField, X, min_denominator=1e-14):
    """``g`` at boundary points ``X`` (shape ``(..., 2)``)."""
    X = as_points(X, 2)
    _, gphi, _ = op.phi(X)
    norm2 = np.sum(gphi * gphi, axis=-1)
    if np.any(norm2 == 0):
        raise DegeneracyError("grad phi vanishes on the boundary")
    _, dA = op.a(X)
    divA = np.trace(dA, axis1=-2, axis2=-1)  # (div A)_i = d_j a^{ij}
    numer = np.sum((op.b(X) - divA) * gphi, axis=-1)
    _, dQ = op.degeneracy(X)
    denom = np.sum(dQ * gphi, axis=-1) / norm2
    if np.any(np.abs(denom) < min_denominator):
        bad = X[np.abs(denom) < min_denominator].reshape(-1, 2)[0]
        raise DegeneracyError(f"d_k(a^ij phi_i phi_j) phi^k vanishes at {bad}")
    return numer / denom


def boundary_samples(op: OperatorField, count):
    """Trace ``phi = 0`` by bisection along ``count`` columns ``x1 = const``."""
    (x_lo, x_hi), (y_lo, y_hi) = op.box
    x1 = np.linspace(x_lo, x_hi, count)

    def phi_col(x2, c):
        return float(op.phi(np.array([c, x2]))[0])

    roots = np.empty(count)
    for i, c in enumerate(x1):
        f_lo, f_hi = phi_col(y_lo, c), phi_col(y_hi, c)
        if f_lo == 0.0:
            roots[i] = y_lo
            continue
        if f_hi == 0.0:
            roots[i] = y_hi
            continue
        if np.sign(f_lo) == np.sign(f_hi):
            raise NumericError(f"phi does not change sign on column x1={c}")
        roots[i] = optimize.bisect(phi_col, y_lo, y_hi, args=(c,), xtol=BISECT_XTOL)
    return np.column_stack([x1, roots])


def window_upper(a):
    """Upper end ``(3 + 2a)/(2a - 1)`` of the exponent window (inf when ``a <= 1/2``)."""
    return (3.0 + 2.0 * a) / (2.0 * a - 1.0) if a > 0.5 else np.inf


@dataclass
class FicheraReport:
    points: np.ndarray
    g: np.ndarray
    sup_g: float
    inf_g: float
    a: float
    b: float
    window: tuple
    resolution: int
    error_bar: float
    operator: str = ""

    @property
    def b_exceeds_one(self):
        return self.b > 1.0

    def to_dict(self):
        return {
            "operator": self.operator,
            "resolution": self.resolution,
            "sup_g": self.sup_g,
            "inf_g": self.inf_g,
            "a": self.a,
            "b": self.b,
            "b_exceeds_one": self.b_exceeds_one,
            "window": [self.window[0], self.window[1]],
            "error_bar": self.error_bar,
            "samples": [[float(p[0]), float(p[1]), float(v)] for p, v in zip(self.points, self.g)],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "x2", "g"])
        for p, v in zip(self.points, self.g):
            w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(v))])
        return buf.getvalue()


def exponent_window(op: OperatorField, resolution=1000):
    """Sample ``g`` along the boundary and derive ``a``, ``b`` and the exponent window.

    ``error_bar`` is a Lipschitz estimate (largest sampled slope times half the
    largest spacing) of how far the sampled extrema may sit from the true ones.
    """
    pts = boundary_samples(op, resolution)
    g = np.empty(len(pts))
    for i, p in enumerate(pts):
        try:
            g[i] = fichera_ratio(op, p)
        except DegeneracyError as exc:
            raise DegeneracyError(f"boundary sample {i} at {p}: {exc}") from exc
    if len(pts) > 1:
        ds = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        slope = np.max(np.abs(np.diff(g)) / np.where(ds > 0, ds, np.inf))
        err = float(slope * ds.max() / 2.0)
    else:
        err = float("nan")
    sup_g, inf_g = float(g.max()), float(g.min())
    a = sup_g + 1.0
    return FicheraReport(pts, g, sup_g, inf_g, a, inf_g, (1.0, float(window_upper(a))),
                         resolution, err, op.name)


def _x_from_flat(op, y1, y2):
    """Solve ``phi(y1, x2) = y2`` for ``x2`` inside the operator box."""
    lo, hi = op.box[1]

    def res(x2):
        return float(op.phi(np.array([y1, x2]))[0]) - y2

    return optimize.brentq(res, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _d_y2_a22(op, y1, y2):
    """``d/dy2`` of ``a^{ij} phi_i phi_j`` at fixed ``y1 = x1``."""
    x = np.array([y1, _x_from_flat(op, y1, y2)])
    _, dQ = op.degeneracy(x)
    _, gphi, _ = op.phi(x)
    return float(dQ[1] / gphi[1])


def a22_factor(op: OperatorField, y, tol=1e-10):
    """``A^22(y) = int_0^1 d_y2(a^{ij} phi_i phi_j)(y1, t y2) dt`` by adaptive quadrature.

    Because ``a^{ij} phi_i phi_j`` vanishes on the boundary, the flattened
    coefficient factors as ``a22~(y1, y2) = A^22(y1, y2) * y2``.
    """
    y1, y2 = (float(v) for v in np.ravel(y))
    if y2 == 0.0:
        return _d_y2_a22(op, y1, 0.0)
    out = integrate.quad(lambda t: _d_y2_a22(op, y1, t * y2), 0.0, 1.0,
                         epsabs=tol, epsrel=1e-12, full_output=True)
    # a fourth element is quad's warning message
    if len(out) > 3 and out[1] > tol:
        raise NumericError(f"A22 quadrature did not converge: {out[3]}")
    return out[0]


@dataclass
class Lemma41Report:
    points: np.ndarray
    A22: np.ndarray
    b2: np.ndarray
    ratio: np.ndarray
    threshold: float
    passed_each: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return bool(np.all(self.passed_each))

    @property
    def worst_margin(self):
        return float(np.min(self.ratio - self.threshold))

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "min_A22": float(np.min(self.A22)),
        }


def lemma41_check(op: OperatorField, points=None, threshold=2.0, resolution=200):
    """Check ``A^22 > 0`` and ``b2~ / A^22 > threshold`` on boundary samples."""
    pts = boundary_samples(op, resolution) if points is None else np.atleast_2d(points)
    A22 = np.array([_d_y2_a22(op, p[0], 0.0) for p in pts])
    b2 = boundary_flatten(op, pts).b2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(A22 > 0, b2 / A22, -np.inf)
    ok = (A22 > 0) & (ratio > threshold)
    return Lemma41Report(pts, A22, b2, ratio, threshold, ok)
