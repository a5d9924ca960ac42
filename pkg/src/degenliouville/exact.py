"""Closed-form solutions, barrier functions and PDE residuals.

Points in the half-space are arrays whose last coordinate is ``y`` (or the
lifted coordinate ``s = 2 sqrt(y)`` for the cylindrical form).  Every field
returned here is a ``(value, grad, hess)`` callable, see :mod:`.fields`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, NumericError, ParameterError
from .fields import as_points, field_values, positive_power
from .params import GeneralizedParams, ProblemParams, aggregate, classify

__all__ = [
    "BubbleParams",
    "HalfSpacePoint",
    "AsymptoticCoeffs",
    "BarrierReport",
    "bubble_field",
    "bubble_eval",
    "bubble_grad_hess",
    "lifted_bubble_field",
    "bubble_field_multi",
    "bubble_eval_multi",
    "residual_001",
    "residual_003",
    "halfspace_operator",
    "residual_halfspace",
    "kernel_h_field",
    "kernel_h_eval",
    "barrier_eval",
    "choose_beta",
    "lemma25_l",
    "asymptotic_eval",
    "kelvin_asymptotic_fit",
    "residual_rows_csv",
]


@dataclass(frozen=True)
class BubbleParams:
    """Concentration scale ``t >= 0`` and tangential centre ``x0``."""

    t: float
    x0: tuple = ()

    def __post_init__(self):
        if not self.t >= 0:
            raise DomainError(f"bubble scale t must be >= 0, got {self.t}")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))

    def center(self, n):
        x0 = np.asarray(self.x0, dtype=float)
        if x0.size == 0:
            return np.zeros(n)
        if x0.size != n:
            raise ParameterError(f"x0 has {x0.size} entries, expected {n}")
        return x0


@dataclass(frozen=True)
class HalfSpacePoint:
    x: tuple
    y: float

    def __post_init__(self):
        if self.y < 0:
            raise DomainError(f"y must be >= 0, got {self.y}")

    def as_array(self):
        return np.append(np.asarray(self.x, dtype=float), float(self.y))


def _power_of_inverse(scale, D, gD, hD, beta):
    """``(scale / D)^beta`` with derivatives, given ``D`` and its derivatives."""
    u = (scale / D) ** beta
    g = (-beta * u / D)[..., None] * gD
    h = ((beta * (beta + 1.0) * u / D**2)[..., None, None] * (gD[..., :, None] * gD[..., None, :])
         - (beta * u / D)[..., None, None] * hD)
    return u, g, h


def _zero_field_output(P):
    shape, d = P.shape[:-1], P.shape[-1]
    return np.zeros(shape), np.zeros(shape + (d,)), np.zeros(shape + (d, d))


def _check_critical(params, unchecked):
    if not unchecked and not classify(params).is_critical:
        raise ParameterError(
            f"bubble requires the critical exponent {params.critical_exponent}, got "
            f"alpha={params.alpha} (pass unchecked=True to evaluate anyway)"
        )


def bubble_field(params: ProblemParams, bubble: BubbleParams, unchecked=False):
    """The critical bubble

        u(x, y) = (t sqrt(N (N-2)) / (t^2 + 4y + |x - x0|^2))^((N-2)/2),  N = n + 2a

    as a field on points ``(x_1..x_n, y)``.
    """
    _check_critical(params, unchecked)
    n = params.n
    N = params.effective_dimension
    beta = (N - 2.0) / 2.0
    x0 = bubble.center(n)
    t = bubble.t
    scale = t * np.sqrt(N * (N - 2.0))
    hD_const = np.diag(np.r_[np.full(n, 2.0), 0.0])

    def F(P):
        P = as_points(P, n + 1)
        if t == 0.0:
            return _zero_field_output(P)
        dx = P[..., :n] - x0
        D = t * t + 4.0 * P[..., n] + np.sum(dx * dx, axis=-1)
        gD = np.concatenate([2.0 * dx, np.full(P.shape[:-1] + (1,), 4.0)], axis=-1)
        return _power_of_inverse(scale, D, gD, hD_const, beta)

    return F


def bubble_eval(params, bubble, P, unchecked=False):
    P = as_points(P, params.n + 1)
    if np.any(P[..., -1] < 0):
        raise DomainError("bubble is defined for y >= 0 only")
    return bubble_field(params, bubble, unchecked)(P)[0]


def bubble_grad_hess(params, bubble, P, unchecked=False):
    P = as_points(P, params.n + 1)
    if np.any(P[..., -1] < 0):
        raise DomainError("bubble is defined for y >= 0 only")
    return bubble_field(params, bubble, unchecked)(P)


def lifted_bubble_field(params, bubble, unchecked=False):
    """Bubble in cylindrical coordinates ``(x, s)``, ``s = 2 sqrt(y)``.

    This is the closed form of ``cylindrical_lift(bubble_field(...))`` and is
    even in ``s``, so it is defined on all of R^{n+1}.
    """
    _check_critical(params, unchecked)
    n = params.n
    N = params.effective_dimension
    beta = (N - 2.0) / 2.0
    x0 = np.append(bubble.center(n), 0.0)
    t = bubble.t
    scale = t * np.sqrt(N * (N - 2.0))
    hD = 2.0 * np.eye(n + 1)

    def F(P):
        P = as_points(P, n + 1)
        if t == 0.0:
            return _zero_field_output(P)
        dx = P - x0
        D = t * t + np.sum(dx * dx, axis=-1)
        return _power_of_inverse(scale, D, 2.0 * dx, hD, beta)

    return F


def bubble_field_multi(gparams: GeneralizedParams, bubble: BubbleParams, unchecked=False):
    """m-variable bubble on points ``(x_1..x_n, y_1..y_m)``; depends on ``sum y_i`` only."""
    params = aggregate(gparams)
    _check_critical(params, unchecked)
    n, m = gparams.n, gparams.m
    N = params.effective_dimension
    beta = (N - 2.0) / 2.0
    x0 = bubble.center(n)
    t = bubble.t
    scale = t * np.sqrt(N * (N - 2.0))
    hD = np.diag(np.r_[np.full(n, 2.0), np.zeros(m)])

    def F(P):
        P = as_points(P, n + m)
        if t == 0.0:
            return _zero_field_output(P)
        dx = P[..., :n] - x0
        D = t * t + 4.0 * np.sum(P[..., n:], axis=-1) + np.sum(dx * dx, axis=-1)
        gD = np.concatenate([2.0 * dx, np.full(P.shape[:-1] + (m,), 4.0)], axis=-1)
        return _power_of_inverse(scale, D, gD, hD, beta)

    return F


def bubble_eval_multi(gparams, bubble, P, unchecked=False):
    P = as_points(P, gparams.n + gparams.m)
    if np.any(P[..., gparams.n:] < 0):
        raise DomainError("all y_i must be >= 0")
    return bubble_field_multi(gparams, bubble, unchecked)(P)[0]


def residual_001(F, params: ProblemParams, P):
    """``y u_yy + a u_y + Laplace_x u + u^alpha`` at points ``P = (x, y)``."""
    P = as_points(P, params.n + 1)
    if np.any(P[..., -1] < 0):
        raise DomainError("residual_001 needs y >= 0")
    u, g, H = F(P)
    n = params.n
    y = P[..., n]
    lap_x = np.trace(H[..., :n, :n], axis1=-2, axis2=-1)
    return y * H[..., n, n] + params.a * g[..., n] + lap_x + positive_power(u, params.alpha)


def residual_003(F, gparams: GeneralizedParams, P):
    """``sum y_i u_{y_i y_i} + sum a_i u_{y_i} + Laplace_x u + u^alpha``."""
    n, m = gparams.n, gparams.m
    P = as_points(P, n + m)
    u, g, H = F(P)
    y = P[..., n:]
    a = np.asarray(gparams.a_vec)
    diag_y = np.diagonal(H[..., n:, n:], axis1=-2, axis2=-1)
    lap_x = np.trace(H[..., :n, :n], axis1=-2, axis2=-1)
    return (np.sum(y * diag_y, axis=-1) + g[..., n:] @ a + lap_x
            + positive_power(u, gparams.alpha))


def halfspace_operator(u_g_H, P, drift):
    """Linear part ``Laplace u + drift / s * d_s u`` with ``s`` the last coordinate.

    On ``s = 0`` the singular quotient is replaced by its limit
    ``drift * d_ss u``, valid because ``d_s u(x', 0) = 0`` for the fields this
    is applied to.
    """
    _, g, H = u_g_H
    s = P[..., -1]
    lap = np.trace(H, axis1=-2, axis2=-1)
    on_axis = s == 0.0
    safe_s = np.where(on_axis, 1.0, s)
    quotient = np.where(on_axis, H[..., -1, -1], g[..., -1] / safe_s)
    return lap + drift * quotient


def residual_halfspace(F, params: ProblemParams, P, tau=0.0):
    """``Laplace u + (2a-1)/s d_s u + |P|^(-tau) u^alpha`` on lifted coordinates.

    ``tau = 0`` is the lifted equation itself; a non-zero ``tau`` gives the
    weighted equation satisfied by Kelvin images.
    """
    P = as_points(P, params.n + 1)
    out = F(P)
    lin = halfspace_operator(out, P, 2.0 * params.a - 1.0)
    src = positive_power(out[0], params.alpha)
    if tau:
        src = src * np.linalg.norm(P, axis=-1) ** (-tau)
    return lin + src


def kernel_h_field(params: ProblemParams, lambda0):
    """``h(X) = (lambda0 - X_1) / |X - lambda0 e_1|^N``, an L-harmonic kernel off its pole."""
    d = params.n + 1
    N = params.effective_dimension
    c = np.zeros(d)
    c[0] = lambda0
    eye = np.eye(d)

    def F(P):
        P = as_points(P, d)
        z = P - c
        r2 = np.sum(z * z, axis=-1)
        if np.any(r2 == 0.0):
            raise DomainError("kernel h is singular at lambda0 * e_1")
        z1 = z[..., 0]
        rN = r2 ** (-N / 2.0)
        rN2 = rN / r2
        val = -z1 * rN
        grad = -eye[0] * rN[..., None] + (N * z1 * rN2)[..., None] * z
        e1z = eye[0][:, None] * z[..., None, :]
        hess = (N * rN2)[..., None, None] * (e1z + np.swapaxes(e1z, -1, -2)
                                              + z1[..., None, None] * eye)
        hess -= (N * (N + 2.0) * z1 * rN2 / r2)[..., None, None] * (z[..., :, None] * z[..., None, :])
        return val, grad, hess

    return F


def kernel_h_eval(params, lambda0, P):
    """Return ``(value, residual)`` where the residual is ``L h`` for the lifted operator."""
    P = as_points(P, params.n + 1)
    out = kernel_h_field(params, lambda0)(P)
    return out[0], halfspace_operator(out, P, 2.0 * params.a - 1.0)


# -- barrier functions ------------------------------------------------------

_EXPECTED_SIGN = {"Lemma21": -1, "Lemma22": 1, "Lemma25": 0}
BETA_CAP = 2.0**20


@dataclass
class BarrierReport:
    kind: str
    value: np.ndarray
    L_value: np.ndarray
    expected_sign: int
    beta: float | None = None
    l_s: float | None = None
    tol: float = 0.0

    @property
    def ok(self):
        if self.expected_sign < 0:
            return bool(np.all(self.L_value < 0))
        if self.expected_sign > 0:
            return bool(np.all(self.L_value > 0))
        return bool(np.all(np.abs(self.L_value) <= self.tol))


def lemma25_l(s, m1, N):
    """Coefficient ``l(s) = -(m1 + 1) s^(N-2) / (1 - s^(N-2))``."""
    q = s ** (N - 2.0)
    return -(m1 + 1.0) * q / (1.0 - q)


def _apply_general_L(out, P, params, aij=None, b=None, drift=None):
    """``sum a_ij d_ij h + sum_{i<=n} b_i d_i h + a(x)/x_{n+1} d_{n+1} h``.

    Defaults are the lifted model operator (identity, no first-order tangential
    terms, ``a(x) = 2a - 1``).
    """
    val, g, H = out
    d = P.shape[-1]
    A = np.eye(d) if aij is None else aij(P)
    second = np.einsum("...ij,...ij->...", np.broadcast_to(A, H.shape), H)
    first = 0.0 if b is None else np.sum(b(P) * g[..., : d - 1], axis=-1)
    dr = (2.0 * params.a - 1.0) if drift is None else drift(P)
    s = P[..., -1]
    on_axis = s == 0.0
    quotient = np.where(on_axis, H[..., -1, -1], g[..., -1] / np.where(on_axis, 1.0, s))
    return second + first + dr * quotient


def _barrier_field(kind, params, shape, beta):
    d = params.n + 1
    eye = np.eye(d)
    if kind == "Lemma21":
        r = shape["r"]
        centre = np.zeros(d)
        centre[-1] = r

        def F(P):
            z = P - centre
            q = np.sum(z * z, axis=-1) - r * r
            e = np.exp(-beta * q)
            gq = 2.0 * z
            val = 1.0 - e
            grad = (beta * e)[..., None] * gq
            hess = (beta * e)[..., None, None] * (2.0 * eye - beta * gq[..., :, None] * gq[..., None, :])
            return val, grad, hess

        return F
    if kind == "Lemma22":
        def F(P):
            e = np.exp(-beta * np.sum(P * P, axis=-1))
            val = e - np.exp(-beta)
            grad = (-2.0 * beta * e)[..., None] * P
            hess = (e * 4.0 * beta**2)[..., None, None] * (P[..., :, None] * P[..., None, :])
            hess -= (2.0 * beta * e)[..., None, None] * eye
            return val, grad, hess

        return F
    if kind == "Lemma25":
        N = params.effective_dimension
        m1, s = shape["m1"], shape["s"]
        ls = lemma25_l(s, m1, N)
        p = 2.0 - N

        def F(P):
            rho2 = np.sum(P * P, axis=-1)
            rp = rho2 ** (p / 2.0)
            val = m1 + ls * (rp - 1.0)
            grad = (ls * p * rp / rho2)[..., None] * P
            hess = (ls * p * rp / rho2)[..., None, None] * eye
            hess += (ls * p * (p - 2.0) * rp / rho2**2)[..., None, None] * (P[..., :, None] * P[..., None, :])
            return val, grad, hess

        return F
    raise ParameterError(f"unknown barrier kind {kind!r}")


def _check_barrier_domain(kind, params, shape, P):
    d = params.n + 1
    if kind == "Lemma21":
        r = shape["r"]
        if not 0 < r < 0.5:
            raise DomainError(f"Lemma21 barrier needs 0 < r < 1/2, got {r}")
        centre = np.zeros(d)
        centre[-1] = r
        dist = np.linalg.norm(P - centre, axis=-1)
        ok = (dist >= r / 2) & (dist <= r) & (np.linalg.norm(P, axis=-1) < 1) & (P[..., -1] > 0)
    elif kind == "Lemma22":
        rad = np.linalg.norm(P, axis=-1)
        ok = (rad >= 0.5) & (rad <= 1.0)
    else:
        rad = np.linalg.norm(P, axis=-1)
        ok = (rad > shape["s"]) & (rad < 1.0)
    if not np.all(ok):
        bad = P[~ok].reshape(-1, d)[0]
        raise DomainError(f"point {bad} outside the {kind} barrier domain")


def choose_beta(kind, params, shape, P, operator=None, beta0=1.0):
    """Double ``beta`` until ``L(h)`` has the required strict sign at every probe point."""
    operator = operator or {}
    sign = _EXPECTED_SIGN[kind]
    beta = beta0
    while beta <= BETA_CAP:
        out = _barrier_field(kind, params, shape, beta)(P)
        Lh = _apply_general_L(out, P, params, **operator)
        if np.all(sign * Lh > 0):
            return beta
        beta *= 2.0
    raise NumericError(f"no beta <= 2^20 makes L(h) strictly signed for {kind}")


def barrier_eval(kind, params, shape, P, beta=None, operator=None, tol=1e-10):
    """Evaluate a barrier and ``L`` applied to it.

    ``kind`` is ``"Lemma21"`` (``1 - exp(-beta(|X - (0, r)|^2 - r^2))`` on the
    annulus ``B_r(P) \\ B_{r/2}(P)``), ``"Lemma22"`` (``exp(-beta|X|^2) -
    exp(-beta)`` on ``B_1 \\ B_{1/2}``) or ``"Lemma25"`` (``m1 + l(s)(|X|^(2-N)
    - 1)`` on ``B_1 \\ B_s``).  ``L`` is the lifted model operator unless
    ``operator`` supplies ``aij``, ``b`` or ``drift`` callables.

    The required sign is negative for Lemma21, positive for Lemma22 (the
    comparison uses ``u - eps h``) and zero for Lemma25.  When ``beta`` is None
    it is chosen by :func:`choose_beta` on the supplied points.
    """
    P = as_points(P, params.n + 1)
    _check_barrier_domain(kind, params, shape, P)
    operator = operator or {}
    l_s = None
    if kind == "Lemma25":
        l_s = lemma25_l(shape["s"], shape["m1"], params.effective_dimension)
        beta = None
    elif beta is None:
        beta = choose_beta(kind, params, shape, P, operator)
    out = _barrier_field(kind, params, shape, beta)(P)
    Lh = _apply_general_L(out, P, params, **operator)
    return BarrierReport(kind, out[0], Lh, _EXPECTED_SIGN[kind], beta=beta, l_s=l_s, tol=tol)


# -- behaviour at infinity -------------------------------------------------

@dataclass
class AsymptoticCoeffs:
    """Leading coefficients of ``a0/|X|^(N-2) + sum a_i X_i / |X|^N``."""

    a0: float
    a_i: np.ndarray
    order: float
    residual: float = 0.0
    remainder: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.a_i = np.asarray(self.a_i, dtype=float)


def asymptotic_eval(coeffs: AsymptoticCoeffs, params, P):
    P = as_points(P, params.n + 1)
    rho = np.linalg.norm(P, axis=-1)
    if np.any(rho == 0):
        raise DomainError("asymptotic expansion is not defined at the origin")
    N = params.effective_dimension
    return coeffs.a0 / rho ** (N - 2.0) + (P @ coeffs.a_i) / rho**N


def _sphere_directions(d, count, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def kelvin_asymptotic_fit(v, params, radii, n_directions=64, seed=0, remainder_terms="auto"):
    """Least-squares fit of the expansion at infinity.

    Samples ``v`` on ``n_directions`` directions at each radius and fits the
    rescaled values ``|X|^(N-2) v = a0 + a_i X_i/|X|^2 [+ c_ij X_i X_j/|X|^4]``.
    The quadratic terms model the ``O(|X|^-N)`` remainder, which shares the
    order of the ``a_i`` terms; they need at least two distinct radii to be
    separable from ``a0`` and are used by default whenever that holds.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise ParameterError("radii must be a positive increasing sequence")
    d = params.n + 1
    N = params.effective_dimension
    dirs = _sphere_directions(d, n_directions, seed)
    P = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    rho = np.linalg.norm(P, axis=1)
    target = field_values(v, P) * rho ** (N - 2.0)
    cols = [np.ones_like(rho)] + [P[:, i] / rho**2 for i in range(d)]
    use_rem = (radii.size >= 2) if remainder_terms == "auto" else bool(remainder_terms)
    if use_rem:
        iu, ju = np.triu_indices(d)
        cols += [P[:, i] * P[:, j] / rho**4 for i, j in zip(iu, ju)]
    A = np.column_stack(cols)
    coef, _, rank, _ = np.linalg.lstsq(A, target, rcond=None)
    if rank < A.shape[1]:
        raise FitError(f"asymptotic fit is rank deficient ({rank} < {A.shape[1]})")
    resid = float(np.sqrt(np.mean((A @ coef - target) ** 2)))
    return AsymptoticCoeffs(coef[0], coef[1 : d + 1], N, resid, coef[d + 1 :])


def residual_rows_csv(P, values, residuals):
    """CSV text with one row per sample: coordinates, value, residual."""
    P = np.atleast_2d(P)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"p{i}" for i in range(P.shape[1])] + ["value", "residual"])
    for p, v, r in zip(P, np.ravel(values), np.ravel(residuals)):
        w.writerow([repr(float(c)) for c in p] + [repr(float(v)), repr(float(r))])
    return buf.getvalue()
