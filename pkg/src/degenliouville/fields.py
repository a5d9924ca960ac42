"""Scalar fields carried with analytic first and second derivatives.

A *field* is any callable ``F(P) -> (value, grad, hess)`` where ``P`` has
shape ``(..., d)`` and the outputs have shapes ``(...)``, ``(..., d)`` and
``(..., d, d)``.  All transforms in this package consume and produce fields,
so derivatives are propagated by the chain rule instead of being recomputed
numerically after composition.

The finite-difference helpers here are the independent oracle used to check
those analytic derivatives.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = [
    "as_points",
    "field_values",
    "constant_field",
    "linear_field",
    "sum_fields",
    "scale_field",
    "positive_power",
    "fd_gradient",
    "fd_hessian",
    "fd_step",
]

# 6th-order central stencils, offsets -3..3
_D1 = np.array([-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60])
_D2 = np.array([1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90])
_OFFSETS = np.arange(-3, 4)


def as_points(P, d=None):
    P = np.asarray(P, dtype=float)
    if P.ndim == 0:
        P = P.reshape(1)
    if d is not None and P.shape[-1] != d:
        raise DomainError(f"expected points with {d} coordinates, got shape {P.shape}")
    return P


def field_values(F, P):
    """Evaluate ``F`` and keep only the value (accepts value-only callables too)."""
    out = F(P)
    if isinstance(out, tuple):
        return out[0]
    return out


def constant_field(c):
    def F(P):
        P = as_points(P)
        shape = P.shape[:-1]
        d = P.shape[-1]
        return (np.full(shape, float(c)), np.zeros(shape + (d,)), np.zeros(shape + (d, d)))

    return F


def linear_field(coeffs, offset=0.0):
    """``F(P) = offset + coeffs . P``."""
    coeffs = np.asarray(coeffs, dtype=float)

    def F(P):
        P = as_points(P, coeffs.size)
        shape = P.shape[:-1]
        d = coeffs.size
        return (offset + P @ coeffs, np.broadcast_to(coeffs, shape + (d,)).copy(),
                np.zeros(shape + (d, d)))

    return F


def sum_fields(*fields):
    def F(P):
        outs = [f(P) for f in fields]
        return tuple(sum(o[i] for o in outs) for i in range(3))

    return F


def scale_field(F, c):
    def G(P):
        v, g, h = F(P)
        return c * v, c * g, c * h

    return G


def positive_power(u, alpha):
    """``u**alpha`` with a domain check: negative ``u`` needs an integer exponent."""
    u = np.asarray(u, dtype=float)
    if float(alpha).is_integer():
        return u ** int(alpha)
    if np.any(u < 0):
        raise DomainError(f"u^alpha undefined for negative u with non-integer alpha={alpha}")
    return np.power(u, alpha)


def fd_step(P, rel=1e-3):
    """Step ``rel * (1 + |p|)`` per point, the convention used by every FD oracle."""
    P = as_points(P)
    return rel * (1.0 + np.linalg.norm(P, axis=-1))


def fd_gradient(f, P, h=None):
    """6th-order central-difference gradient of a value function ``f``."""
    P = as_points(P)
    d = P.shape[-1]
    h = fd_step(P) if h is None else np.broadcast_to(h, P.shape[:-1])
    grad = np.zeros(P.shape)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        acc = 0.0
        for w, k in zip(_D1, _OFFSETS):
            if w:
                acc = acc + w * field_values(f, P + (k * h)[..., None] * e)
        grad[..., i] = acc / h
    return grad


def fd_hessian(f, P, h=None):
    """6th-order central-difference Hessian (tensor stencil for mixed terms)."""
    P = as_points(P)
    d = P.shape[-1]
    h = fd_step(P) if h is None else np.broadcast_to(h, P.shape[:-1])
    hess = np.zeros(P.shape + (d,))
    eye = np.eye(d)
    for i in range(d):
        acc = 0.0
        for w, k in zip(_D2, _OFFSETS):
            acc = acc + w * field_values(f, P + (k * h)[..., None] * eye[i])
        hess[..., i, i] = acc / h**2
        for j in range(i + 1, d):
            acc = 0.0
            for wi, ki in zip(_D1, _OFFSETS):
                if not wi:
                    continue
                for wj, kj in zip(_D1, _OFFSETS):
                    if not wj:
                        continue
                    shift = (ki * h)[..., None] * eye[i] + (kj * h)[..., None] * eye[j]
                    acc = acc + wi * wj * field_values(f, P + shift)
            hess[..., i, j] = hess[..., j, i] = acc / h**2
    return hess
