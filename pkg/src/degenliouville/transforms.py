"""Changes of variables acting on points and on fields.

Each transform takes a field ``F(P) -> (value, grad, hess)`` and returns a new
field with derivatives propagated by hand-coded chain rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CoordinateError, DomainError, ParameterError, PreconditionError
from .fields import as_points
from .params import ProblemParams, half_integer_k

__all__ = [
    "FieldMap",
    "BlowupFrame",
    "FlattenedCoeffs",
    "cylindrical_map",
    "kelvin_map",
    "plane_reflection_map",
    "blowup_case1_map",
    "blowup_case2_map",
    "sqrt_substitution_map",
    "cylindrical_lift",
    "even_reflect",
    "dimension_lift",
    "kelvin",
    "reflect_plane",
    "blowup_case1",
    "case1_rescaled_residual",
    "boundary_flatten",
    "blowup_case2",
    "sqrt_substitution",
]


@dataclass(frozen=True)
class FieldMap:
    """A point map with its inverse and the multiplier applied to field values."""

    forward: Callable
    inverse: Callable
    multiplier: Callable = field(default=lambda P: np.ones(np.shape(P)[:-1]))
    domain: str = ""
    contains: Callable = field(default=lambda P: np.ones(np.shape(P)[:-1], dtype=bool))

    def roundtrip_defect(self, P):
        """``max |inverse(forward(P)) - P|`` over valid points."""
        P = as_points(P)
        ok = self.contains(P)
        Q = P[ok]
        if Q.size == 0:
            return 0.0
        return float(np.max(np.abs(self.inverse(self.forward(Q)) - Q)))


def cylindrical_map(n):
    """``(x, y) -> (x, 2 sqrt(y))``."""

    def fwd(P):
        P = as_points(P, n + 1).copy()
        P[..., n] = 2.0 * np.sqrt(P[..., n])
        return P

    def inv(P):
        P = as_points(P, n + 1).copy()
        P[..., n] = P[..., n] ** 2 / 4.0
        return P

    return FieldMap(fwd, inv, domain="y >= 0", contains=lambda P: np.asarray(P)[..., n] >= 0)


def _inversion(P):
    P = as_points(P)
    rho2 = np.sum(P * P, axis=-1)
    if np.any(rho2 == 0):
        raise DomainError("inversion is undefined at the origin")
    return P / rho2[..., None]


def kelvin_map(params: ProblemParams):
    N = params.effective_dimension
    return FieldMap(
        _inversion,
        _inversion,
        multiplier=lambda P: np.linalg.norm(P, axis=-1) ** (2.0 - N),
        domain="X != 0",
        contains=lambda P: np.linalg.norm(P, axis=-1) > 0,
    )


def plane_reflection_map(lam, axis=0):
    return FieldMap(lambda P: reflect_plane(P, lam, axis), lambda P: reflect_plane(P, lam, axis),
                    domain="all points")


def reflect_plane(P, lam, axis=0):
    """``x -> x^lambda``: the ``axis`` coordinate becomes ``2 lambda - x_axis``."""
    P = as_points(P).copy()
    P[..., axis] = 2.0 * lam - P[..., axis]
    return P


def cylindrical_lift(F, n):
    """``ubar(x, s) = u(x, s^2 / 4)`` with chain-rule derivatives.

    ``d_s ubar = (s/2) u_y`` so ``d_s ubar(x', 0) = 0`` for any C^2 input.
    """

    def G(P):
        P = as_points(P, n + 1)
        s = P[..., n]
        Q = P.copy()
        Q[..., n] = s * s / 4.0
        u, g, H = F(Q)
        g2 = g.copy()
        g2[..., n] = 0.5 * s * g[..., n]
        H2 = H.copy()
        H2[..., :n, n] = 0.5 * s[..., None] * H[..., :n, n]
        H2[..., n, :n] = H2[..., :n, n]
        H2[..., n, n] = 0.5 * g[..., n] + 0.25 * s * s * H[..., n, n]
        return u, g2, H2

    return G


def even_reflect(F, n, check_points=None, tol=1e-8, seed=0):
    """Extend a field on ``s >= 0`` evenly to all of R^{n+1}.

    ``d_s F(x', 0)`` is checked at ``check_points`` (tangential samples,
    default 64 uniform points in ``[-2, 2]^n``); an odd component is rejected.
    """
    if check_points is None:
        check_points = np.random.default_rng(seed).uniform(-2, 2, (64, n))
    X = np.atleast_2d(np.asarray(check_points, dtype=float))
    P0 = np.column_stack([X, np.zeros(len(X))])
    ds = F(P0)[1][:, n]
    worst = int(np.argmax(np.abs(ds)))
    if abs(ds[worst]) > tol:
        raise PreconditionError(
            f"d_s u(x', 0) = {ds[worst]:.3e} at x'={X[worst]} exceeds {tol}; "
            "cannot extend evenly as a C^1 field",
            worst=(X[worst], float(ds[worst])),
        )

    def G(P):
        P = as_points(P, n + 1)
        sign = np.where(P[..., n] < 0, -1.0, 1.0)
        Q = P.copy()
        Q[..., n] = np.abs(P[..., n])
        u, g, H = F(Q)
        g = g.copy()
        H = H.copy()
        g[..., n] *= sign
        H[..., :n, n] *= sign[..., None]
        H[..., n, :n] *= sign[..., None]
        return u, g, H

    return G


def dimension_lift(F, params: ProblemParams, k):
    """``v(x, xi) = ubar(x, |xi|)`` on R^{n+k}, defined when ``a = k/2``.

    Then ``Laplace_{x,xi} v = Laplace ubar + (k-1)/|xi| d_s ubar`` off
    ``{xi = 0}``, i.e. the lifted equation becomes the Lane-Emden equation in
    integer dimension ``n + k``.
    """
    if half_integer_k(params.a) != k:
        raise ParameterError(f"dimension lift needs a = k/2 = {k / 2}, got a = {params.a}")
    n = params.n
    d = n + k

    def G(P):
        P = as_points(P, d)
        xi = P[..., n:]
        r = np.linalg.norm(xi, axis=-1)
        Q = np.concatenate([P[..., :n], r[..., None]], axis=-1)
        u, g, H = F(Q)
        tiny = r < 1e-300
        rs = np.where(tiny, 1.0, r)
        w = xi / rs[..., None]  # unit vector in xi (zero on the axis)
        gs, Hss = g[..., n], H[..., n, n]
        grad = np.concatenate([g[..., :n], gs[..., None] * w], axis=-1)
        hess = np.zeros(P.shape + (d,))
        hess[..., :n, :n] = H[..., :n, :n]
        hess[..., :n, n:] = H[..., :n, n, None] * w[..., None, :]
        hess[..., n:, :n] = np.swapaxes(hess[..., :n, n:], -1, -2)
        eye = np.eye(k)
        ww = w[..., :, None] * w[..., None, :]
        # on the axis d_s u = 0, so d_s u / r -> d_ss u
        radial = np.where(tiny, Hss, gs / rs)
        hess[..., n:, n:] = Hss[..., None, None] * ww + radial[..., None, None] * (eye - ww)
        return u, grad, hess

    return G


def kelvin(F, params: ProblemParams):
    """``v(X) = |X|^(2-N) ubar(X / |X|^2)``, ``N = n + 2a``.

    If ``ubar`` solves the lifted equation, ``v`` solves the same equation with
    source weight ``|X|^(-tau)``.  The transform is an involution.
    """
    N = params.effective_dimension
    p = (2.0 - N) / 2.0

    def G(P):
        P = as_points(P)
        d = P.shape[-1]
        rho = np.sum(P * P, axis=-1)
        if np.any(rho == 0):
            raise DomainError("Kelvin transform is undefined at the origin")
        eye = np.eye(d)
        Y = P / rho[..., None]
        u, g, H = F(Y)
        # dY_k/dX_i
        J = eye / rho[..., None, None] - 2.0 * (P[..., :, None] * P[..., None, :]) / rho[..., None, None] ** 2
        # d^2 Y_k / dX_i dX_j
        dX = (np.einsum("ik,...j->...ijk", eye, P) + np.einsum("jk,...i->...ijk", eye, P)
              + np.einsum("ij,...k->...ijk", eye, P))
        d2Y = (-2.0 * dX / rho[..., None, None, None] ** 2
               + 8.0 * np.einsum("...i,...j,...k->...ijk", P, P, P) / rho[..., None, None, None] ** 3)
        gw = np.einsum("...k,...ki->...i", g, J)
        Hw = np.einsum("...kl,...ki,...lj->...ij", H, J, J) + np.einsum("...k,...ijk->...ij", g, d2Y)
        m = rho**p
        gm = (2.0 * p * rho ** (p - 1.0))[..., None] * P
        Hm = (2.0 * p * rho ** (p - 1.0))[..., None, None] * eye + (
            4.0 * p * (p - 1.0) * rho ** (p - 2.0))[..., None, None] * (P[..., :, None] * P[..., None, :])
        val = m * u
        grad = m[..., None] * gw + u[..., None] * gm
        hess = (m[..., None, None] * Hw + gm[..., :, None] * gw[..., None, :]
                + gw[..., :, None] * gm[..., None, :] + u[..., None, None] * Hm)
        return val, grad, hess

    return G


# -- blow-up rescalings ----------------------------------------------------

@dataclass(frozen=True)
class BlowupFrame:
    """Base point, magnitude ``M`` and scale ``mu`` with ``mu^(2/(alpha-1)) M = 1``."""

    base: tuple
    M: float
    alpha: float
    mu: float | None = None

    def __post_init__(self):
        if self.M <= 0:
            raise ParameterError("blow-up magnitude must be positive")
        if self.alpha <= 1:
            raise ParameterError("alpha must exceed 1")
        object.__setattr__(self, "base", tuple(float(v) for v in np.atleast_1d(self.base)))
        mu = self.M ** (-(self.alpha - 1.0) / 2.0) if self.mu is None else float(self.mu)
        if mu <= 0:
            raise ParameterError("blow-up scale must be positive")
        object.__setattr__(self, "mu", mu)
        if abs(mu ** (2.0 / (self.alpha - 1.0)) * self.M - 1.0) > 1e-12:
            raise ParameterError("frame violates mu^(2/(alpha-1)) M = 1")

    @property
    def value_scale(self):
        return self.mu ** (2.0 / (self.alpha - 1.0))


def blowup_case1_map(frame: BlowupFrame):
    base = np.asarray(frame.base)
    mu = frame.mu
    return FieldMap(lambda X: (as_points(X) - base) / mu, lambda Y: base + mu * as_points(Y),
                    multiplier=lambda Y: np.full(np.shape(Y)[:-1], frame.value_scale),
                    domain="all points")


def blowup_case1(F, frame: BlowupFrame):
    """``v(Y) = mu^(2/(alpha-1)) u(x^k + mu Y)``."""
    base = np.asarray(frame.base)
    mu = frame.mu
    c = frame.value_scale

    def G(Y):
        u, g, H = F(base + mu * as_points(Y, base.size))
        return c * u, (c * mu) * g, (c * mu * mu) * H

    return G


def case1_rescaled_residual(v, frame: BlowupFrame, aij, bi, h, Y, limit=False):
    """Residual of the rescaled interior equation at points ``Y``.

    The original equation is ``a^{ij}(x) u_ij + b^i(x) u_i + h(x) u^alpha = 0``.
    After rescaling it reads ``a^{ij}(x^k + mu Y) v_ij + mu b^i v_i +
    h(x^k + mu Y) v^alpha = 0``.  With ``limit=True`` the coefficients are frozen
    at the base point and the first-order term dropped (the limit equation).
    """
    Y = as_points(Y, len(frame.base))
    base = np.asarray(frame.base)
    X = np.broadcast_to(base, Y.shape) if limit else base + frame.mu * Y
    val, g, H = v(Y)
    A = aij(X)
    second = np.einsum("...ij,...ij->...", A, H)
    first = 0.0 if limit else frame.mu * np.sum(bi(X) * g, axis=-1)
    return second + first + h(X) * np.power(np.maximum(val, 0.0), frame.alpha)


@dataclass
class FlattenedCoeffs:
    y: np.ndarray
    a22: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    b1: np.ndarray
    b2: np.ndarray


def boundary_flatten(op, X, min_phi2=1e-10):
    """Coefficients in the boundary-flattening coordinates ``y1 = x1``, ``y2 = phi(x)``.

    ``a22~ = a^{ij} phi_i phi_j``, ``a11~ = a^{11}``, ``a12~ = a^{1j} phi_j``,
    ``b1~ = b^1`` and ``b2~ = b^j phi_j + a^{ij} phi_ij``.
    """
    X = as_points(X, 2)
    phi, g, Hphi = op.phi(X)
    if np.any(np.abs(g[..., 1]) < min_phi2):
        raise CoordinateError("d_2 phi vanishes; (x1, phi) is not a coordinate system here")
    A, _ = op.a(X)
    b = op.b(X)
    a22 = np.einsum("...ij,...i,...j->...", A, g, g)
    a12 = np.einsum("...j,...j->...", A[..., 0, :], g)
    b2 = np.einsum("...j,...j->...", b, g) + np.einsum("...ij,...ij->...", A, Hphi)
    y = np.stack([X[..., 0], phi], axis=-1)
    return FlattenedCoeffs(y, a22, A[..., 0, 0].copy(), a12, b[..., 0].copy(), b2)


def blowup_case2_map(frame: BlowupFrame):
    base = np.asarray(frame.base)
    scale = np.array([frame.mu, frame.mu**2])
    return FieldMap(lambda Y: (as_points(Y, 2) - base) / scale,
                    lambda Pp: base + scale * as_points(Pp, 2), domain="all points")


def blowup_case2(Y, frame: BlowupFrame):
    """``p1 = (y1 - y1^k)/mu``, ``p2 = (y2 - y2^k)/mu^2``."""
    return blowup_case2_map(frame).forward(Y)


def sqrt_substitution_map(c_k):
    if c_k < 0:
        raise ParameterError("c_k = y2^k / mu^2 must be >= 0")
    rc = np.sqrt(c_k)

    def fwd(Pp):
        Pp = as_points(Pp, 2)
        arg = Pp[..., 1] + c_k
        if np.any(arg < 0):
            raise DomainError("sqrt substitution needs p2 + c_k >= 0")
        Q = Pp.copy()
        Q[..., 1] = 2.0 * np.sqrt(arg) - 2.0 * rc
        return Q

    def inv(Q):
        Q = as_points(Q, 2).copy()
        Q[..., 1] = (Q[..., 1] / 2.0 + rc) ** 2 - c_k
        return Q

    return FieldMap(fwd, inv, domain="p2 + c_k >= 0",
                    contains=lambda Pp: np.asarray(Pp)[..., 1] + c_k >= 0)


def sqrt_substitution(Pp, c_k):
    """``q1 = p1``, ``q2 = 2 sqrt(p2 + c_k) - 2 sqrt(c_k)``."""
    return sqrt_substitution_map(c_k).forward(Pp)
