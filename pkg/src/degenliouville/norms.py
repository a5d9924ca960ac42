"""Norms on the half-space: the ``|xi|`` multiplier, ``I_q`` / ``I_beta`` functionals,
Hölder seminorms, ``y``-weighted Sobolev norms and a weighted energy-identity checker.

The tangential multiplier ``Lambda_1`` (symbol ``|xi|``) is realized on a
periodic torus in ``x``.  Fields must be supported well inside the period,
otherwise wrap-around contaminates every spectral quantity.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import DomainError, ParameterError
from .fields import as_points, fd_gradient, field_values

__all__ = [
    "PeriodicGridField",
    "NormReport",
    "EnergyReport",
    "lambda1",
    "laplacian_x",
    "multiplier_table_csv",
    "y_derivative",
    "iq_norm",
    "holder_quotient",
    "ibeta_seminorm",
    "weighted_sobolev_norm",
    "smooth_step",
    "cutoffs",
    "eta_derivative_bounds",
    "smooth_bump",
    "holder_norm_grid",
    "embedding_ratio",
    "energy_estimate_check",
]

PAIR_BUDGET = 10**6


# -- periodic fields and the |xi| multiplier --------------------------------

@dataclass
class PeriodicGridField:
    """Values on a periodic uniform grid in ``x`` times a uniform grid in ``y >= 0``.

    ``values`` has shape ``(nx_1, ..., nx_n, ny)``.  The periodic endpoint is
    not stored: node ``nx_k`` would coincide with node 0.
    """

    values: np.ndarray
    x_axes: tuple
    y: np.ndarray
    periods: tuple

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.x_axes = tuple(np.asarray(x, dtype=float) for x in self.x_axes)
        self.y = np.asarray(self.y, dtype=float)
        self.periods = tuple(float(L) for L in self.periods)
        if self.values.shape != tuple(len(x) for x in self.x_axes) + (len(self.y),):
            raise ParameterError("values shape does not match the axes")
        for x, L in zip(self.x_axes, self.periods):
            if x[-1] - x[0] >= L:
                raise ParameterError("periodic axis must not repeat its first node")

    @classmethod
    def sample(cls, F, periods, nx, y_max, ny, x0=0.0):
        """Sample a value function on ``prod [x0, x0 + L_k) x [0, y_max]``."""
        periods = tuple(np.atleast_1d(periods).astype(float))
        n = len(periods)
        nx = tuple(np.broadcast_to(nx, (n,)))
        x0 = np.broadcast_to(x0, (n,))
        x_axes = tuple(x0[k] + periods[k] * np.arange(nx[k]) / nx[k] for k in range(n))
        y = np.linspace(0.0, y_max, ny)
        mesh = np.stack(np.meshgrid(*x_axes, y, indexing="ij"), axis=-1)
        return cls(field_values(F, mesh), x_axes, y, periods)

    @property
    def n(self):
        return len(self.x_axes)

    @property
    def hx(self):
        return np.array([L / len(x) for x, L in zip(self.x_axes, self.periods)])

    @property
    def hy(self):
        return float(self.y[1] - self.y[0])

    def with_values(self, values):
        return PeriodicGridField(values, self.x_axes, self.y, self.periods)

    def check_uniform(self, rtol=1e-9):
        for x, L in zip(self.x_axes, self.periods):
            h = L / len(x)
            if np.max(np.abs(np.diff(x) - h)) > rtol * h:
                raise DomainError("Lambda_1 needs a uniform periodic grid in x")
        dy = np.diff(self.y)
        if np.max(np.abs(dy - dy[0])) > rtol * abs(dy[0]):
            raise DomainError("y grid must be uniform")

    def wavenumbers(self):
        """``|k|`` on the FFT grid, shape ``(nx_1, ..., nx_n)``."""
        ks = [2.0 * np.pi * np.fft.fftfreq(len(x), d=L / len(x)) for x, L in zip(self.x_axes, self.periods)]
        K = np.meshgrid(*ks, indexing="ij")
        return np.sqrt(sum(k * k for k in K))


def _multiplier(f: PeriodicGridField, symbol):
    f.check_uniform()
    axes = tuple(range(f.n))
    F = np.fft.fftn(f.values, axes=axes)
    out = np.fft.ifftn(F * symbol[..., None], axes=axes)
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if np.max(np.abs(out.imag)) > 1e-12 * scale:
        raise DomainError("multiplier output is not real; input is not real-valued")
    return f.with_values(out.real)


def lambda1(f: PeriodicGridField):
    """Apply the multiplier ``|xi|`` in ``x`` on every ``y`` slice."""
    return _multiplier(f, f.wavenumbers())


def laplacian_x(f: PeriodicGridField):
    """Spectral tangential Laplacian (symbol ``-|xi|^2``)."""
    return _multiplier(f, -f.wavenumbers() ** 2)


def multiplier_table_csv(f: PeriodicGridField):
    """Mode index table with the ``|xi|`` multiplier value, for audit."""
    K = f.wavenumbers()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"m{k + 1}" for k in range(f.n)] + ["multiplier"])
    for idx in itertools.product(*(range(len(x)) for x in f.x_axes)):
        modes = [int(np.fft.fftfreq(len(x), 1.0 / len(x))[i]) for i, x in zip(idx, f.x_axes)]
        w.writerow(modes + [repr(float(K[idx]))])
    return buf.getvalue()


# -- y derivatives (4th order) ----------------------------------------------

_C1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_C2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# one-sided 4th-order stencils on nodes 0..5 for the first two rows
_L1 = {0: np.array([-25.0, 48.0, -36.0, 16.0, -3.0, 0.0]) / 12.0,
       1: np.array([-3.0, -10.0, 18.0, -6.0, 1.0, 0.0]) / 12.0}
_L2 = {0: np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0,
       1: np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0}


def y_derivative(values, h, order):
    """4th-order derivative along the last axis (central inside, one-sided near the ends)."""
    v = np.asarray(values, dtype=float)
    m = v.shape[-1]
    if m < 6:
        raise ParameterError("need at least 6 nodes in y for 4th-order stencils")
    c, edge = (_C1, _L1) if order == 1 else (_C2, _L2)
    out = np.empty_like(v)
    out[..., 2:-2] = sum(c[k] * v[..., k:m - 4 + k] for k in range(5))
    sign = -1.0 if order == 1 else 1.0
    for row, w in edge.items():
        out[..., row] = np.tensordot(v[..., :6], w, axes=([-1], [0]))
        out[..., m - 1 - row] = sign * np.tensordot(v[..., ::-1][..., :6], w, axes=([-1], [0]))
    return out / h**order


# -- I_q and I_beta ----------------------------------------------------------

@dataclass
class NormReport:
    kind: str
    exponent: float
    terms: dict
    grid: dict
    notes: list = field(default_factory=list)

    @property
    def total(self):
        return float(sum(self.terms.values()))

    def to_dict(self):
        return {"kind": self.kind, "exponent": self.exponent, "terms": dict(self.terms),
                "total": self.total, "grid": dict(self.grid), "notes": list(self.notes)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _constituents(v: PeriodicGridField):
    vy = y_derivative(v.values, v.hy, 1)
    vyy = y_derivative(v.values, v.hy, 2)
    y = v.y
    return {
        "y_vyy": y * vyy,
        "lambda1sq_v": -laplacian_x(v).values,
        "sqrty_lambda1_vy": np.sqrt(y) * lambda1(v.with_values(vy)).values,
        "vy": vy,
    }


def _lq(values, v: PeriodicGridField, q):
    a = np.abs(values)
    if np.isinf(q):
        return float(np.max(a))
    # periodic rectangle rule in x, trapezoid in y
    cell = float(np.prod(v.hx))
    return float((cell * np.trapezoid(np.sum(a**q, axis=tuple(range(v.n))), v.y)) ** (1.0 / q))


def _grid_info(v: PeriodicGridField):
    return {"nx": [len(x) for x in v.x_axes], "ny": len(v.y), "periods": list(v.periods),
            "y_max": float(v.y[-1])}


def iq_norm(v: PeriodicGridField, q):
    """The five ``L^q`` terms of ``I_q``: ``y v_yy``, ``Lambda_1^2 v``, ``y^(1/2) Lambda_1 v_y``, ``v_y``, ``v``."""
    if q < 1:
        raise ParameterError(f"q must be >= 1, got {q}")
    terms = {k: _lq(val, v, q) for k, val in _constituents(v).items()}
    terms["v"] = _lq(v.values, v, q)
    notes = ["domain truncated to the sampled box; the x-period wraps around"]
    if q > v.n + 1:
        notes.append(f"q > n+1: bootstrap-admissible exponent (n={v.n})")
    return NormReport("I_q", float(q), terms, _grid_info(v), notes)


def _offsets(shape, spacings, axes, periodic):
    """Integer offsets on ``axes`` (one of each +/- pair), sorted by physical length."""
    ranges = []
    for ax in axes:
        m = shape[ax]
        lim = m // 2 if periodic[ax] else m - 1
        ranges.append(np.arange(-lim, lim + 1))
    O = np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, len(axes))
    # keep the lexicographically positive half
    first = np.argmax(O != 0, axis=1)
    lead = O[np.arange(len(O)), first]
    O = O[lead > 0]
    length = np.linalg.norm(O * spacings[list(axes)], axis=1)
    order = np.argsort(length, kind="stable")
    return O[order], length[order]


def _shifted_pairs(g, off, axes, periodic):
    a, b = g, g
    for ax, o in zip(axes, off):
        if o == 0:
            continue
        if periodic[ax]:
            b = np.roll(b, -o, axis=ax)
        else:
            sl_a = [slice(None)] * g.ndim
            sl_b = [slice(None)] * g.ndim
            if o > 0:
                sl_a[ax], sl_b[ax] = slice(0, -o), slice(o, None)
            else:
                sl_a[ax], sl_b[ax] = slice(-o, None), slice(0, o)
            a, b = a[tuple(sl_a)], b[tuple(sl_b)]
    return a, b


def holder_quotient(g, spacings, beta, axes=None, periodic=None, pair_budget=PAIR_BUDGET,
                    random_pairs=10**5, seed=0):
    """Sampled sup of ``|g(p) - g(q)| / |p - q|^beta`` over pairs differing only on ``axes``.

    All grid pairs are taken, shortest separations first, until
    ``pair_budget`` is spent; then ``random_pairs`` random pairs are added.
    The result is a lower bound for the true seminorm.  Periodic axes use the
    minimum-image distance.
    """
    g = np.asarray(g, dtype=float)
    spacings = np.asarray(spacings, dtype=float)
    axes = tuple(range(g.ndim)) if axes is None else tuple(axes)
    periodic = (False,) * g.ndim if periodic is None else tuple(periodic)
    best = 0.0
    used = 0
    offs, lengths = _offsets(g.shape, spacings, axes, periodic)
    for off, dist in zip(offs, lengths):
        a, b = _shifted_pairs(g, off, axes, periodic)
        if a.size == 0:
            continue
        best = max(best, float(np.max(np.abs(a - b))) / dist**beta)
        used += a.size
        if used >= pair_budget:
            break
    if used >= pair_budget and random_pairs:
        rng = np.random.default_rng(seed)
        i = [rng.integers(0, s, random_pairs) for s in g.shape]
        j = list(i)
        for ax in axes:
            j[ax] = rng.integers(0, g.shape[ax], random_pairs)
        d = np.zeros(random_pairs)
        for ax in axes:
            k = np.abs(i[ax] - j[ax])
            if periodic[ax]:
                k = np.minimum(k, g.shape[ax] - k)
            d += (k * spacings[ax]) ** 2
        ok = d > 0
        if np.any(ok):
            q = np.abs(g[tuple(i)] - g[tuple(j)])[ok] / np.sqrt(d[ok]) ** beta
            best = max(best, float(np.max(q)))
    return best


def ibeta_seminorm(v: PeriodicGridField, beta, pair_budget=PAIR_BUDGET, random_pairs=10**5, seed=0):
    """x-Hölder seminorms of the ``I_beta`` constituents on equal-``y`` pairs, plus ``sup |v|``."""
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")
    sp = np.append(v.hx, v.hy)
    axes = tuple(range(v.n))
    periodic = (True,) * v.n + (False,)
    terms = {k: holder_quotient(val, sp, beta, axes, periodic, pair_budget, random_pairs, seed)
             for k, val in _constituents(v).items()}
    terms["sup_v"] = float(np.max(np.abs(v.values)))
    notes = ["Hölder terms are sampled lower bounds"]
    return NormReport("I_beta", float(beta), terms, _grid_info(v), notes)


# -- weighted Sobolev norm ---------------------------------------------------

def _field_value_grad(u, P):
    out = u(P)
    if isinstance(out, tuple):
        return np.asarray(out[0], dtype=float), np.asarray(out[1], dtype=float)
    return np.asarray(out, dtype=float), fd_gradient(u, P)


def weighted_sobolev_norm(u, alpha, p, domain, cells=16, order=8):
    """``(int_U y^(p alpha) (|Du|^p + |u|^p))^(1/p)`` on a box ``U``.

    ``domain`` lists ``(lo, hi)`` per axis with ``y`` last.  Gauss-Legendre
    cells in every direction, except that cells touching ``y = 0`` use
    Gauss-Jacobi nodes carrying the ``y^(p alpha)`` weight exactly.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    dom = np.array(domain, dtype=float)
    if dom[-1, 0] < 0:
        raise DomainError("weighted norm needs y >= 0")
    w_exp = p * alpha
    t, w = leggauss(order)
    tj, wj = roots_jacobi(order, 0.0, w_exp)

    def axis_rule(lo, hi, weighted):
        edges = np.linspace(lo, hi, cells + 1)
        nodes, weights = [], []
        for c0, c1 in zip(edges[:-1], edges[1:]):
            h = c1 - c0
            if weighted and c0 == 0.0:
                # int_0^h y^w g dy = (h/2)^(w+1) sum wj g(h (1 + tj) / 2)
                nodes.append(0.5 * h * (1.0 + tj))
                weights.append((0.5 * h) ** (w_exp + 1.0) * wj)
            else:
                y = c0 + 0.5 * h * (1.0 + t)
                nodes.append(y)
                weights.append(0.5 * h * w * (y**w_exp if weighted else 1.0))
        return np.concatenate(nodes), np.concatenate(weights)

    rules = [axis_rule(lo, hi, False) for lo, hi in dom[:-1]] + [axis_rule(*dom[-1], True)]
    X = np.stack(np.meshgrid(*(r[0] for r in rules), indexing="ij"), axis=-1)
    W = np.prod(np.stack(np.meshgrid(*(r[1] for r in rules), indexing="ij"), axis=-1), axis=-1)
    val, grad = _field_value_grad(u, X)
    integrand = np.linalg.norm(grad, axis=-1) ** p + np.abs(val) ** p
    return float(np.sum(W * integrand) ** (1.0 / p))


# -- cutoffs -----------------------------------------------------------------

_T_CLIP = 2e-3  # exp(-1/t) is below 1e-200 here


def _f_and_derivs(t):
    t = np.clip(t, _T_CLIP, None)
    f = np.exp(-1.0 / t)
    return f, f / t**2, f * (1.0 - 2.0 * t) / t**4


def smooth_step(t):
    """C-infinity step ``S`` with ``S = 0`` for ``t <= 0``, ``S = 1`` for ``t >= 1``.

    Returns ``(S, S', S'')``.  ``S = f(t) / (f(t) + f(1 - t))`` with ``f = exp(-1/t)``.
    """
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    A, A1, A2 = _f_and_derivs(t)
    B, B1, B2 = _f_and_derivs(1.0 - t)
    B1 = -B1
    D = A + B
    N = A1 * B - A * B1
    S = np.where(t >= 1.0, 1.0, np.where(inside, A / D, 0.0))
    S1 = np.where(inside, N / D**2, 0.0)
    S2 = np.where(inside, ((A2 * B - A * B2) * D - 2.0 * N * (A1 + B1)) / D**3, 0.0)
    return S, S1, S2


def cutoffs(r, eps, center=(0.0, 0.0)):
    """``psi_r`` (1 on ``|p - c| <= r/2``, 0 for ``|p - c| >= r``) and ``eta_eps``.

    ``psi_r`` follows the field convention ``P -> (val, grad, hess)``;
    ``eta_eps`` maps ``y -> (eta, eta', eta'')`` with ``eta = 0`` on
    ``(0, eps)`` and ``eta = 1`` on ``(2 eps, inf)``.
    """
    if r <= 0 or eps <= 0:
        raise ParameterError("cutoff radius and thickness must be positive")
    c = np.asarray(center, dtype=float)

    def psi(P):
        P = as_points(P, len(c))
        z = P - c
        rho = np.linalg.norm(z, axis=-1)
        S, S1, S2 = smooth_step(2.0 - 2.0 * rho / r)
        safe = np.where(rho > 0, rho, 1.0)
        e = z / safe[..., None]
        d1 = -2.0 / r
        grad = (S1 * d1)[..., None] * e
        eye = np.eye(len(c))
        proj = (eye - e[..., :, None] * e[..., None, :]) / safe[..., None, None]
        hess = (S2 * d1**2)[..., None, None] * e[..., :, None] * e[..., None, :] \
            + (S1 * d1)[..., None, None] * proj
        return S, grad, hess

    def eta(y):
        S, S1, S2 = smooth_step((np.asarray(y, dtype=float) - eps) / eps)
        return S, S1 / eps, S2 / eps**2

    return psi, eta


def eta_derivative_bounds(eps, samples=20001):
    """``(max |eta'| eps, max |eta''| eps^2)`` on a dense sample of ``[0, 3 eps]``."""
    _, eta = cutoffs(1.0, eps)
    _, d1, d2 = eta(np.linspace(0.0, 3.0 * eps, samples))
    return float(np.max(np.abs(d1)) * eps), float(np.max(np.abs(d2)) * eps**2)


# -- embedding sweep ---------------------------------------------------------

def smooth_bump(center, radius=1.0, scale=1.0):
    """``exp(-1 / (1 - |(p - c) scale / radius|^2))`` with analytic gradient."""
    c = np.asarray(center, dtype=float)

    def F(P):
        P = as_points(P, len(c))
        z = (P - c) * scale / radius
        s2 = np.sum(z * z, axis=-1)
        inside = s2 < 1.0
        den = np.where(inside, 1.0 - s2, 1.0)
        val = np.where(inside, np.exp(-1.0 / den), 0.0)
        dval = np.where(inside, -2.0 * val / den**2, 0.0)  # d val / d s2
        grad = (dval[..., None] * 2.0 * z) * (scale / radius)
        return val, grad

    return F


def holder_norm_grid(u, domain, nodes, beta, pair_budget=PAIR_BUDGET, seed=0):
    """``sup |u| + [u]_beta`` with the seminorm sampled on a tensor grid over ``domain``."""
    dom = np.array(domain, dtype=float)
    axes = [np.linspace(lo, hi, nodes) for lo, hi in dom]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    g = field_values(u, X)
    sp = np.array([ax[1] - ax[0] for ax in axes])
    return float(np.max(np.abs(g))) + holder_quotient(g, sp, beta, pair_budget=pair_budget, seed=seed)


def embedding_ratio(lam, alpha=0.25, p=8.0, n=1, domain=((-1.0, 1.0), (0.0, 1.0)), nodes=257, seed=0):
    """``||u_lam||_{C^beta} / ||u_lam||_{W^{1,p}_alpha}`` for ``u_lam(p) = u(lam p)``, ``beta = 1 - alpha - (n+1)/p``.

    ``u`` is a fixed smooth bump centred on the boundary.
    """
    beta = 1.0 - alpha - (n + 1.0) / p
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"embedding exponent beta={beta} outside (0, 1)")
    u = smooth_bump(np.zeros(n + 1), radius=1.0, scale=lam)
    num = holder_norm_grid(u, domain, nodes, beta, seed=seed)
    den = weighted_sobolev_norm(u, alpha, p, domain, cells=max(16, int(8 * lam)))
    return num / den, beta


# -- weighted energy identity ------------------------------------------------

@dataclass
class EnergyReport:
    status: str  # "ok" or "hypothesis-violated"
    lhs: float
    data_norms: dict
    ratio: float
    sweep: list
    bounded: bool

    def to_dict(self):
        return {"status": self.status, "lhs": self.lhs, "data_norms": dict(self.data_norms),
                "ratio": self.ratio, "sweep": list(self.sweep), "bounded": self.bounded}


def _coef(c):
    """Coefficient as ``P -> (val, grad)``; numbers become constants."""
    if callable(c):
        def F(P):
            out = c(P)
            if isinstance(out, tuple):
                return np.asarray(out[0], float), np.asarray(out[1], float)
            return np.asarray(out, float), fd_gradient(c, P)
        return F

    def K(P):
        P = as_points(P, 2)
        return np.full(P.shape[:-1], float(c)), np.zeros(P.shape)

    return K


def _u_derivs(u, P):
    out = u(P)
    if isinstance(out, tuple):
        return np.asarray(out[0], float), np.asarray(out[1], float)
    return np.asarray(out, float), fd_gradient(u, P)


def energy_estimate_check(u, B11, B12, B1, B2, f, r, center=0.0, h=None, eps_list=None, c0_tol=0.0):
    """Weighted energy estimate and its integrated identity near ``(center, 0)``.

    The equation is ``p2 u_22 + B11 u_11 + 2 p2 B12 u_12 + B1 u_1 + B2 u_2 + f = 0``.
    With ``Psi = psi_r eta_eps`` the identity obtained by multiplying with
    ``Psi u`` and integrating by parts reads

        int Psi p2 u_2^2 + int Psi B11 u_1^2
          = int (Psi_2 + p2 Psi_22 / 2 - (B2 Psi)_2 / 2) u^2
            + int (B1 Psi - (B11 Psi)_1) u u_1
            - 2 int p2 (B12 Psi)_1 u u_2 - 2 int p2 B12 Psi u_1 u_2 + int Psi u f.

    Parameters
    ----------
    u : callable
        ``P -> (val, grad, ...)`` or value-only (finite-difference gradient).
    B11, B12, B1, B2 : callable or float
        Coefficients; callables return values or ``(val, grad)``.
    f : callable
        ``(P, u) -> source``.
    r : float
        Cutoff radius.
    h : float, optional
        Quadrature spacing (default ``r / 64``).
    eps_list : sequence, optional
        Thicknesses of ``eta_eps`` (default ``2h, 4h, 8h``).
    """
    h = r / 64.0 if h is None else h
    eps_list = [2 * h, 4 * h, 8 * h] if eps_list is None else list(eps_list)
    x = np.arange(center - r, center + r + 0.5 * h, h)
    y = np.arange(0.0, r + 0.5 * h, h)
    P = np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1)

    def integral(g):
        return float(np.trapezoid(np.trapezoid(g, y, axis=1), x))

    b11, g11 = _coef(B11)(P)
    if np.min(b11[:, 0]) <= c0_tol:
        return EnergyReport("hypothesis-violated", float("nan"), {}, float("nan"), [], False)
    b12, g12 = _coef(B12)(P)
    b1, g1 = _coef(B1)(P)
    b2, g2 = _coef(B2)(P)
    uv, ug = _u_derivs(u, P)
    fv = np.asarray(f(P, uv), float)
    p2 = P[..., 1]
    u1, u2 = ug[..., 0], ug[..., 1]

    psi, _ = cutoffs(r, eps_list[0], (center, 0.0))
    pv, pg, ph = psi(P)
    lhs = np.sqrt(integral(p2 * (pv * u2) ** 2)) + np.sqrt(integral((pv * u1) ** 2))

    def c1(val, grad):
        return float(np.max(np.abs(pv * val)) + np.max(np.linalg.norm(
            pv[..., None] * grad + val[..., None] * pg, axis=-1)))

    data = {
        "psi_B11_C1": c1(b11, g11),
        "psi_B12_C1": c1(b12, g12),
        "psi_B1_C1": c1(b1, g1),
        "psi_B2_C1": c1(b2, g2),
        "psi_f_Linf": float(np.max(np.abs(pv * fv))),
        "psi_u_Linf": float(np.max(np.abs(pv * uv))),
    }
    ratio = float(lhs / (1.0 + sum(data.values())))

    # eps -> 0 limit of the energy, Psi = psi_r
    limit = np.sqrt(integral(pv * p2 * u2**2)) + np.sqrt(integral(pv * u1**2))
    sweep = []
    for eps in eps_list:
        _, eta = cutoffs(r, eps, (center, 0.0))
        e0, e1, e2 = eta(p2)
        Psi = pv * e0
        Psi1 = pg[..., 0] * e0
        Psi2 = pg[..., 1] * e0 + pv * e1
        Psi22 = ph[..., 1, 1] * e0 + 2.0 * pg[..., 1] * e1 + pv * e2
        left = integral(Psi * p2 * u2**2) + integral(Psi * b11 * u1**2)
        right = (integral((Psi2 + 0.5 * p2 * Psi22 - 0.5 * (g2[..., 1] * Psi + b2 * Psi2)) * uv**2)
                 + integral((b1 * Psi - (g11[..., 0] * Psi + b11 * Psi1)) * uv * u1)
                 - 2.0 * integral(p2 * (g12[..., 0] * Psi + b12 * Psi1) * uv * u2)
                 - 2.0 * integral(p2 * b12 * Psi * u1 * u2)
                 + integral(Psi * uv * fv))
        energy = np.sqrt(integral(Psi * p2 * u2**2)) + np.sqrt(integral(Psi * u1**2))
        sweep.append({"eps": float(eps), "identity_lhs": float(left), "identity_rhs": float(right),
                      "defect": float(abs(left - right)), "energy": float(energy)})
    bounded = all(np.isfinite(s["energy"]) and s["energy"] <= limit * (1.0 + 1e-8) for s in sweep)
    return EnergyReport("ok", float(lhs), data, ratio, sweep, bool(bounded))
