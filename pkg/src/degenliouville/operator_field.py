"""Variable-coefficient operators ``a^{ij} d_ij u + b^i d_i u + f(x, u)`` in the plane."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ParameterError
from .fields import as_points

__all__ = [
    "OperatorField",
    "model_operator",
    "perturbed_model",
    "rotated",
    "scaled_phi",
    "polynomial_operator",
]


@dataclass(frozen=True)
class OperatorField:
    """Coefficients of a 2-D operator with a defining function for the boundary.

    Attributes
    ----------
    a : callable
        ``P -> (A, dA)`` with ``A[..., i, j] = a^{ij}`` and
        ``dA[..., i, j, k] = d_k a^{ij}``.
    b : callable
        ``P -> (..., 2)`` first-order coefficients.
    phi : callable
        Field ``P -> (phi, grad phi, hess phi)``; the domain is ``phi > 0``.
    f : callable or None
        Source ``(P, u) -> value``.
    box : tuple
        ``((x1_lo, x1_hi), (x2_lo, x2_hi))`` bracketing the boundary, used to
        trace ``phi = 0`` column by column.
    """

    a: Callable
    b: Callable
    phi: Callable
    f: Callable | None = None
    box: tuple = ((-1.0, 1.0), (-1.0, 1.0))
    name: str = "custom"

    def degeneracy(self, P):
        """``Q = a^{ij} phi_i phi_j`` and its gradient."""
        P = as_points(P, 2)
        A, dA = self.a(P)
        _, gphi, hphi = self.phi(P)
        Q = np.einsum("...ij,...i,...j->...", A, gphi, gphi)
        dQ = (np.einsum("...ijk,...i,...j->...k", dA, gphi, gphi)
              + 2.0 * np.einsum("...ij,...ik,...j->...k", A, hphi, gphi))
        return Q, dQ


def _model_a(P):
    P = as_points(P, 2)
    A = np.zeros(P.shape[:-1] + (2, 2))
    A[..., 0, 0] = 1.0
    A[..., 1, 1] = P[..., 1]
    dA = np.zeros(P.shape[:-1] + (2, 2, 2))
    dA[..., 1, 1, 1] = 1.0
    return A, dA


def _phi_y(P):
    P = as_points(P, 2)
    g = np.zeros(P.shape)
    g[..., 1] = 1.0
    return P[..., 1].copy(), g, np.zeros(P.shape + (2,))


def model_operator(drift, alpha=None, box=((-1.0, 1.0), (-1.0, 1.0))):
    """The model ``u_xx + y u_yy + drift u_y (+ u^alpha)`` with ``phi = y``."""

    def b(P):
        P = as_points(P, 2)
        out = np.zeros(P.shape)
        out[..., 1] = drift
        return out

    f = None if alpha is None else (lambda P, u: np.power(np.maximum(u, 0.0), alpha))
    return OperatorField(_model_a, b, _phi_y, f, box, name=f"model(drift={drift})")


def perturbed_model(drift, eps, box=((-np.pi, np.pi), (-1.0, 1.0))):
    """Model operator with ``b^2(x) = drift + eps sin(x_1)``."""

    def b(P):
        P = as_points(P, 2)
        out = np.zeros(P.shape)
        out[..., 1] = drift + eps * np.sin(P[..., 0])
        return out

    return OperatorField(_model_a, b, _phi_y, None, box, name=f"perturbed(drift={drift},eps={eps})")


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotated(op: OperatorField, theta, box=None):
    """Conjugate every coefficient by the rotation ``x' = R x``."""
    R = _rotation(theta)

    def back(P):
        return as_points(P, 2) @ R  # R^T x'

    def a(P):
        A, dA = op.a(back(P))
        A2 = np.einsum("ip,...pq,jq->...ij", R, A, R)
        dA2 = np.einsum("ip,jq,...pqr,kr->...ijk", R, R, dA, R)
        return A2, dA2

    def b(P):
        return op.b(back(P)) @ R.T

    def phi(P):
        v, g, h = op.phi(back(P))
        return v, g @ R.T, np.einsum("ip,...pq,jq->...ij", R, h, R)

    f = None if op.f is None else (lambda P, u: op.f(back(P), u))
    return OperatorField(a, b, phi, f, box or op.box, name=f"rotated({op.name},{theta})")


def scaled_phi(op: OperatorField, c):
    """Same operator with defining function ``c * phi``."""
    if c <= 0:
        raise ParameterError("defining function scale must be positive")

    def phi(P):
        v, g, h = op.phi(P)
        return c * v, c * g, c * h

    return replace(op, phi=phi, name=f"{op.name}*phi{c}")


def _poly2(coef):
    """Value and gradient/Hessian of a 2-D power-series polynomial ``sum c[i,j] x^i y^j``."""
    c = np.atleast_2d(np.asarray(coef, dtype=float))
    cx = npoly.polyder(c, axis=0)
    cy = npoly.polyder(c, axis=1)
    cxx = npoly.polyder(cx, axis=0)
    cxy = npoly.polyder(cx, axis=1)
    cyy = npoly.polyder(cy, axis=1)

    def ev(cc, P):
        return npoly.polyval2d(P[..., 0], P[..., 1], cc)

    def F(P):
        P = as_points(P, 2)
        g = np.stack([ev(cx, P), ev(cy, P)], axis=-1)
        hxy = ev(cxy, P)
        H = np.stack([np.stack([ev(cxx, P), hxy], -1), np.stack([hxy, ev(cyy, P)], -1)], -2)
        return ev(c, P), g, H

    return F


def polynomial_operator(a11, a12, a22, b1, b2, phi, alpha=None, box=((-1.0, 1.0), (-1.0, 1.0))):
    """Operator whose coefficients are 2-D polynomials.

    Each argument is a coefficient array ``c[i, j]`` of ``x1^i x2^j`` (the
    layout of :func:`numpy.polynomial.polynomial.polyval2d`).
    """
    p11, p12, p22, q1, q2, ph = (_poly2(c) for c in (a11, a12, a22, b1, b2, phi))

    def a(P):
        P = as_points(P, 2)
        v11, g11, _ = p11(P)
        v12, g12, _ = p12(P)
        v22, g22, _ = p22(P)
        A = np.stack([np.stack([v11, v12], -1), np.stack([v12, v22], -1)], -2)
        dA = np.stack([np.stack([g11, g12], -2), np.stack([g12, g22], -2)], -3)
        return A, dA

    def b(P):
        P = as_points(P, 2)
        return np.stack([q1(P)[0], q2(P)[0]], axis=-1)

    f = None if alpha is None else (lambda P, u: np.power(np.maximum(u, 0.0), alpha))
    return OperatorField(a, b, ph, f, box, name="polynomial")
