"""Finite differences for ``y u_yy + a u_y + Laplace_x u (+ u^alpha)`` on a truncated half-space.

The grid covers ``prod_k [lo_k, hi_k] x [0, Y]``.  Nodes on the tangential
faces and on ``y = Y`` carry Dirichlet data; the degenerate face ``y = 0`` is
*not* a boundary: the equation holds there with the ``y u_yy`` term gone.

The drift ``a u_y`` uses a forward (upwind) difference everywhere, so ``-L``
is an M-matrix on every grid and the discrete maximum principle holds.  This
costs one order of accuracy in ``y``.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergenceError, ParameterError, PreconditionError, SolverError
from .fields import field_values

__all__ = [
    "Grid",
    "GridField",
    "DiscreteOperator",
    "MMatrixCertificate",
    "SemilinearResult",
    "HopfReport",
    "INTERIOR",
    "FACE",
    "DIRICHLET",
    "assemble",
    "max_principle_check",
    "solve_linear",
    "solve_semilinear",
    "hopf_probe",
    "hopf_probe_field",
]

INTERIOR, FACE, DIRICHLET = 0, 1, 2


@dataclass(frozen=True)
class Grid:
    """Tensor grid; ``bounds`` and ``shape`` list the tangential axes first, ``y`` last."""

    bounds: tuple
    shape: tuple

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        shape = tuple(int(s) for s in self.shape)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "shape", shape)
        if len(bounds) != len(shape) or len(shape) < 2:
            raise ParameterError("need matching bounds/shape with at least one tangential axis")
        if bounds[-1][0] != 0.0:
            raise ParameterError("the y axis must start at the degenerate face y = 0")
        if any(hi <= lo for lo, hi in bounds):
            raise ParameterError("every axis needs hi > lo")
        if min(shape) < 3:
            raise ParameterError(f"grid too small: {shape} (need >= 3 nodes per axis)")

    @classmethod
    def box(cls, n, x_lo, x_hi, y_max, nx, ny):
        return cls(((x_lo, x_hi),) * n + ((0.0, y_max),), (nx,) * n + (ny,))

    @property
    def n(self):
        return len(self.shape) - 1

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def axes(self):
        return [np.linspace(lo, hi, m) for (lo, hi), m in zip(self.bounds, self.shape)]

    @property
    def spacings(self):
        return np.array([(hi - lo) / (m - 1) for (lo, hi), m in zip(self.bounds, self.shape)])

    def points(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def node_class(self):
        cls = np.zeros(self.shape, dtype=np.int8)
        idx = np.indices(self.shape)
        dirichlet = idx[-1] == self.shape[-1] - 1
        for k in range(self.n):
            dirichlet |= (idx[k] == 0) | (idx[k] == self.shape[k] - 1)
        cls[(idx[-1] == 0) & ~dirichlet] = FACE
        cls[dirichlet] = DIRICHLET
        return cls


@dataclass
class GridField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("grid field values must be finite")

    @classmethod
    def sample(cls, grid, F):
        return cls(grid, field_values(F, grid.points()))

    # -- CSV: one row per node, C order ------------------------------------
    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(self.grid.n)] + ["y", "value"])
        pts = self.grid.points().reshape(-1, self.grid.n + 1)
        for p, v in zip(pts, self.values.ravel()):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array(rows[1:], dtype=float)
        coords = data[:, :-1]
        axes = [np.unique(coords[:, k]) for k in range(coords.shape[1])]
        grid = Grid(tuple((ax[0], ax[-1]) for ax in axes), tuple(len(ax) for ax in axes))
        return cls(grid, data[:, -1].reshape(grid.shape))

    # -- binary: 32-byte header, axis table, little-endian doubles ----------
    MAGIC = b"DGFIELD1"
    _HEADER = struct.Struct("<8sIIQQ")  # magic, version, ndim, count, reserved
    _AXIS = struct.Struct("<Qdd")  # nodes, lo, hi

    def to_bytes(self):
        g = self.grid
        out = [self._HEADER.pack(self.MAGIC, 1, len(g.shape), g.size, 0)]
        out += [self._AXIS.pack(m, lo, hi) for (lo, hi), m in zip(g.bounds, g.shape)]
        out.append(self.values.astype("<f8").tobytes(order="C"))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data):
        magic, version, ndim, count, _ = cls._HEADER.unpack_from(data, 0)
        if magic != cls.MAGIC or version != 1:
            raise ParameterError("not a grid-field binary (bad magic or version)")
        off = cls._HEADER.size
        bounds, shape = [], []
        for _ in range(ndim):
            m, lo, hi = cls._AXIS.unpack_from(data, off)
            off += cls._AXIS.size
            bounds.append((lo, hi))
            shape.append(m)
        vals = np.frombuffer(data, dtype="<f8", count=count, offset=off)
        return cls(Grid(tuple(bounds), tuple(shape)), vals.astype(float))


@dataclass
class MMatrixCertificate:
    passed: bool
    bad_diagonal: np.ndarray
    bad_offdiagonal: np.ndarray
    bad_rowsum: np.ndarray

    @property
    def offending_rows(self):
        return np.unique(np.concatenate([self.bad_diagonal, self.bad_offdiagonal, self.bad_rowsum]))


@dataclass
class DiscreteOperator:
    """Sparse ``L`` (Dirichlet rows replaced by the identity) plus node classes."""

    matrix: sp.csr_matrix
    grid: Grid
    node_class: np.ndarray
    params: object = None
    drift: str = "upwind"
    certificate: MMatrixCertificate | None = None

    def apply(self, u):
        vals = u.values if isinstance(u, GridField) else np.asarray(u)
        return (self.matrix @ vals.ravel()).reshape(self.grid.shape)

    @property
    def equation_rows(self):
        return self.node_class.ravel() != DIRICHLET


def assemble(params, grid: Grid, drift="upwind"):
    """Assemble the linear part of the degenerate operator.

    ``drift="centered"`` replaces the interior upwind drift by a centred
    difference; it is only there to exhibit M-matrix failure.
    """
    if drift not in ("upwind", "centered"):
        raise ParameterError(f"unknown drift scheme {drift!r}")
    a = params.a
    shape = grid.shape
    n = grid.n
    h = grid.spacings
    cls = grid.node_class().ravel()
    idx = np.arange(grid.size).reshape(shape)
    strides = [int(np.prod(shape[k + 1:])) for k in range(n + 1)]
    jy = np.indices(shape)[-1].ravel()
    y = grid.axes[-1][jy]

    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(np.broadcast_to(v, r.shape).astype(float))

    eq = np.flatnonzero(cls != DIRICHLET)
    for k in range(n):
        w = 1.0 / h[k] ** 2
        add(eq, eq - strides[k], w)
        add(eq, eq + strides[k], w)
        add(eq, eq, -2.0 * w)

    sy = strides[n]
    inner = np.flatnonzero(cls == INTERIOR)
    face = np.flatnonzero(cls == FACE)
    hy = h[n]
    yi = y[inner]
    add(inner, inner - sy, yi / hy**2)
    add(inner, inner + sy, yi / hy**2)
    add(inner, inner, -2.0 * yi / hy**2)
    if drift == "upwind":
        add(inner, inner + sy, a / hy)
        add(inner, inner, -a / hy)
    else:
        add(inner, inner + sy, a / (2.0 * hy))
        add(inner, inner - sy, -a / (2.0 * hy))
    # degenerate face: the equation reduces to a u_y + Laplace_x u
    add(face, face + sy, a / hy)
    add(face, face, -a / hy)

    dirichlet = np.flatnonzero(cls == DIRICHLET)
    add(dirichlet, dirichlet, 1.0)

    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.size, grid.size),
    )
    A.sum_duplicates()
    A.eliminate_zeros()
    return DiscreteOperator(A, grid, cls.reshape(shape), params, drift)


def max_principle_check(op: DiscreteOperator, tol=1e-12):
    """Sign structure of ``-L`` on equation rows: diag > 0, off-diag <= 0, row sums >= 0."""
    M = -op.matrix.tocsr()
    eq = op.equation_rows
    diag = M.diagonal()
    scale = np.maximum(np.abs(diag), 1.0)
    off = M - sp.diags(diag)
    off = off.tocoo()
    pos = (off.data > tol * scale[off.row]) & eq[off.row]
    rowsum = np.asarray(M.sum(axis=1)).ravel()
    bad_diag = np.flatnonzero(eq & (diag <= 0))
    bad_off = np.unique(off.row[pos])
    bad_sum = np.flatnonzero(eq & (rowsum < -tol * scale))
    cert = MMatrixCertificate(
        passed=bad_diag.size == 0 and bad_off.size == 0 and bad_sum.size == 0,
        bad_diagonal=bad_diag,
        bad_offdiagonal=bad_off,
        bad_rowsum=bad_sum,
    )
    op.certificate = cert
    return cert


def _dirichlet_values(grid, dirichlet):
    if callable(dirichlet):
        return field_values(dirichlet, grid.points())
    if isinstance(dirichlet, GridField):
        return dirichlet.values
    return np.broadcast_to(np.asarray(dirichlet, dtype=float), grid.shape)


def _rhs_values(grid, rhs):
    if isinstance(rhs, GridField):
        return rhs.values
    return np.broadcast_to(np.asarray(rhs, dtype=float), grid.shape)


def solve_linear(op: DiscreteOperator, rhs, dirichlet=0.0, rtol=1e-10):
    """Solve ``L u = rhs`` on equation rows with ``u = dirichlet`` on the outer boundary.

    The degenerate face gets no data.  Uses a sparse LU factorization and one
    step of iterative refinement if the first residual misses ``rtol``.
    """
    grid = op.grid
    D = op.node_class.ravel() == DIRICHLET
    b = np.where(D, _dirichlet_values(grid, dirichlet).ravel(), _rhs_values(grid, rhs).ravel())
    if not np.all(np.isfinite(b)):
        raise ParameterError("rhs and boundary data must be finite")
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return GridField(grid, np.zeros(grid.shape))
    lu = spla.splu(op.matrix.tocsc())
    u = lu.solve(b)
    history = [np.linalg.norm(op.matrix @ u - b) / bnorm]
    if history[-1] > rtol:
        u = u - lu.solve(op.matrix @ u - b)
        history.append(np.linalg.norm(op.matrix @ u - b) / bnorm)
    if not np.all(np.isfinite(u)) or history[-1] > rtol:
        raise SolverError(f"linear solve residual {history[-1]:.3e} exceeds {rtol}", history)
    return GridField(grid, u.reshape(grid.shape))


@dataclass
class SemilinearResult:
    u: GridField
    update_norms: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.update_norms)


def _pos_power(u, alpha):
    up = np.maximum(u, 0.0)
    return up**alpha, alpha * up ** (alpha - 1.0)


def solve_semilinear(params, grid, dirichlet, initial_guess, max_newton=30, tol=1e-10, op=None):
    """Newton's method for ``L u + u^alpha = 0`` with Dirichlet data on the outer boundary.

    Each step solves ``(L + alpha u^(alpha-1)) du = -(L u + u^alpha)`` on the
    equation rows, then projects negative entries back to zero so that
    non-integer powers stay real.  Stops when ``max|du| <= tol``.
    """
    op = op or assemble(params, grid)
    D = op.node_class.ravel() == DIRICHLET
    eq = ~D
    g = _dirichlet_values(grid, dirichlet).ravel()
    u0 = initial_guess.values if isinstance(initial_guess, GridField) else np.asarray(initial_guess, float)
    u = np.broadcast_to(u0, grid.shape).ravel().astype(float)
    if np.any(u[eq] < 0):
        raise PreconditionError("initial guess must be nonnegative")
    u[D] = g[D]
    A = op.matrix.tocsr()
    alpha = params.alpha
    updates, residuals = [], []
    growth = 0
    for _ in range(max_newton):
        p, dp = _pos_power(u, alpha)
        F = A @ u + np.where(eq, p, 0.0) - np.where(D, g, 0.0)
        residuals.append(float(np.max(np.abs(F))))
        J = (A + sp.diags(np.where(eq, dp, 0.0))).tocsc()
        du = spla.spsolve(J, -F)
        if not np.all(np.isfinite(du)):
            raise NonConvergenceError("Newton step produced non-finite values", updates)
        u = u + du
        u[eq] = np.maximum(u[eq], 0.0)
        updates.append(float(np.max(np.abs(du))))
        if updates[-1] <= tol:
            p, _ = _pos_power(u, alpha)
            F = A @ u + np.where(eq, p, 0.0) - np.where(D, g, 0.0)
            residuals.append(float(np.max(np.abs(F))))
            return SemilinearResult(GridField(grid, u.reshape(grid.shape)), updates, residuals, True)
        growth = growth + 1 if len(updates) > 1 and updates[-1] > updates[-2] else 0
        if growth >= 3:
            raise NonConvergenceError(
                f"Newton update norm grew for 3 consecutive steps: {updates[-4:]}", updates)
    return SemilinearResult(GridField(grid, u.reshape(grid.shape)), updates, residuals, False)


@dataclass
class HopfReport:
    status: str  # "boundary-minimum", "constant" or "interior-minimum"
    point: np.ndarray
    margin: float
    normal: np.ndarray


def hopf_probe(u: GridField, tol=1e-12):
    """Inward difference quotient at the boundary minimum of a supersolution.

    A strictly positive margin is the discrete form of the Hopf boundary
    lemma.  An interior minimum below the boundary minimum means ``u`` is not
    a supersolution and is reported as ``"interior-minimum"``.
    """
    grid = u.grid
    vals = u.values
    cls = grid.node_class()
    h = grid.spacings
    if np.ptp(vals) <= tol * max(1.0, np.max(np.abs(vals))):
        return HopfReport("constant", grid.points()[(0,) * (grid.n + 1)], 0.0, np.zeros(grid.n + 1))
    bmask = cls == DIRICHLET
    bmin = vals[bmask].min()
    imin = vals[~bmask].min()
    if imin < bmin - tol:
        loc = np.unravel_index(np.argmin(np.where(bmask, np.inf, vals)), grid.shape)
        return HopfReport("interior-minimum", grid.points()[loc], float(imin - bmin), np.zeros(grid.n + 1))
    # every boundary node attaining the minimum is probed; the smallest margin is reported
    ties = np.argwhere(bmask & (vals <= bmin + tol))
    pts = grid.points()
    best = None
    for loc in map(tuple, ties):
        step = np.zeros(grid.n + 1, dtype=int)
        for k in range(grid.n):
            if loc[k] == 0:
                step[k] = 1
            elif loc[k] == grid.shape[k] - 1:
                step[k] = -1
        if loc[-1] == grid.shape[-1] - 1:
            step[-1] = -1
        nb = tuple(np.asarray(loc) + step)
        dist = float(np.linalg.norm(step * h))
        margin = float((vals[nb] - vals[loc]) / dist)
        if best is None or margin < best[0]:
            best = (margin, loc, step * h / dist)
    margin, loc, normal = best
    return HopfReport("boundary-minimum", pts[loc], margin, normal)


def hopf_probe_field(F, point, inward_normal, step=1e-4):
    """One-sided inward difference quotient ``(u(p + step nu) - u(p)) / step`` for a callable."""
    p = np.asarray(point, dtype=float)
    nu = np.asarray(inward_normal, dtype=float)
    nu = nu / np.linalg.norm(nu)
    return float((field_values(F, p + step * nu) - field_values(F, p)) / step)
