"""Moving-plane scans, minimum-principle probes and radial-symmetry statistics.

For a plane ``x_k = lam`` the left half-space is ``Sigma = {x_k < lam}`` and
``x^lam`` is the mirror image of ``x``.  The reflection gap is
``min_{x in Sigma} (v(x) - v(x^lam))``, estimated on a sample of ``Sigma``.
For a field decaying away from a single centre ``c`` the gap is positive for
every ``lam > c_k`` and vanishes at ``lam = c_k``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import norm, qmc

from .errors import DomainError, PreconditionError, ScanError
from .exact import halfspace_operator
from .fd import DIRICHLET, DiscreteOperator, GridField
from .fields import fd_gradient, fd_hessian, field_values
from .transforms import reflect_plane

__all__ = [
    "GapSample",
    "PlaneScanResult",
    "MinCheckReport",
    "SymmetryReport",
    "sample_sigma",
    "gap_samples",
    "reflection_gap",
    "mirror_gap_max",
    "critical_plane",
    "lemma25_min_check",
    "lemma25_min_check_grid",
    "symmetry_report",
]

DEFAULT_EXCLUSION = 1e-3
REFINE_STEPS = 6


class _Evaluator:
    """Uniform value access for callables and grid fields."""

    def __init__(self, v, box=None):
        self.grid = None
        if isinstance(v, GridField):
            self.grid = v.grid
            self._interp = RegularGridInterpolator(v.grid.axes, v.values, method="linear",
                                                   bounds_error=False, fill_value=np.nan)
            self.box = np.array(v.grid.bounds, dtype=float)
            self.dim = v.grid.n + 1
            # multilinear interpolation error is O(h^2)
            self.interp_tol = float(np.max(v.grid.spacings) ** 2)
        else:
            if box is None:
                raise DomainError("a sampling box is required for callable fields")
            self._f = v
            self.box = np.array(box, dtype=float)
            self.dim = len(self.box)
            self.interp_tol = 0.0

    def __call__(self, P):
        if self.grid is not None:
            return self._interp(P)
        return field_values(self._f, P)

    def inside(self, P):
        return np.all((P >= self.box[:, 0]) & (P <= self.box[:, 1]), axis=-1)


def _sobol(dim, count, seed):
    m = int(np.ceil(np.log2(max(count, 2))))
    return qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:count]


def sample_sigma(box, lam, axis=0, count=4096, seed=0):
    """Quasi-random points of ``box`` with ``x_axis < lam``."""
    box = np.array(box, dtype=float)
    hi = min(lam, box[axis, 1])
    if hi <= box[axis, 0]:
        raise DomainError(f"Sigma_lambda is empty in the box for lambda={lam}")
    lo_hi = box.copy()
    lo_hi[axis, 1] = hi
    U = _sobol(len(box), count, seed)
    return lo_hi[:, 0] + U * (lo_hi[:, 1] - lo_hi[:, 0])


@dataclass
class GapSample:
    points: np.ndarray
    gaps: np.ndarray
    n_clipped: int
    n_excluded: int
    exclusion_radius: float
    tolerance: float

    @property
    def min_gap(self):
        return float(np.min(self.gaps))


def gap_samples(v, lam, axis=0, box=None, count=4096, seed=0, singular_points=(),
                exclusion_radius=DEFAULT_EXCLUSION):
    """Sample ``v(x) - v(x^lam)`` on ``Sigma_lam``.

    Grid fields use all grid nodes in ``Sigma`` plus quasi-random points;
    samples whose mirror image leaves the grid are clipped and counted.
    Samples within ``exclusion_radius`` of a singular point, or whose mirror
    image is, are dropped.
    """
    ev = _Evaluator(v, box)
    P = sample_sigma(ev.box, lam, axis, count, seed)
    if ev.grid is not None:
        nodes = ev.grid.points().reshape(-1, ev.dim)
        P = np.vstack([nodes[nodes[:, axis] < lam], P])
    R = reflect_plane(P, lam, axis)
    keep = ev.inside(R)
    n_clipped = int(np.sum(~keep))
    n_excluded = 0
    for c in singular_points:
        c = np.asarray(c, dtype=float)
        near = (np.linalg.norm(P - c, axis=-1) < exclusion_radius) | \
               (np.linalg.norm(R - c, axis=-1) < exclusion_radius)
        n_excluded += int(np.sum(near & keep))
        keep &= ~near
    P, R = P[keep], R[keep]
    if len(P) == 0:
        raise DomainError("no admissible samples in Sigma_lambda")
    gaps = ev(P) - ev(R)
    return GapSample(P, gaps, n_clipped, n_excluded, exclusion_radius, ev.interp_tol)


def reflection_gap(v, lam, axis=0, box=None, count=4096, seed=0, singular_points=(),
                   exclusion_radius=DEFAULT_EXCLUSION):
    """``min (v(x) - v(x^lam))`` over sampled ``Sigma_lam``."""
    return gap_samples(v, lam, axis, box, count, seed, singular_points, exclusion_radius).min_gap


def mirror_gap_max(v, lam, axis=0, box=None, count=4096, seed=0):
    """``max (v(x') - v(x'^lam))`` over the mirror images of the ``Sigma`` samples.

    Equals ``-reflection_gap`` with the same arguments.
    """
    ev = _Evaluator(v, box)
    P = sample_sigma(ev.box, lam, axis, count, seed)
    if ev.grid is not None:
        nodes = ev.grid.points().reshape(-1, ev.dim)
        P = np.vstack([nodes[nodes[:, axis] < lam], P])
    M = reflect_plane(P, lam, axis)
    keep = ev.inside(M)
    M = M[keep]
    return float(np.max(ev(M) - ev(reflect_plane(M, lam, axis))))


@dataclass
class PlaneScanResult:
    axis: int
    step: float
    lambdas: np.ndarray
    gaps: np.ndarray
    positive: np.ndarray
    lambda0: float
    bracket: tuple
    tolerance: float
    gap_above: float
    gap_at: float

    @property
    def monotone(self):
        """True when the nonnegative flags switch exactly once along the scan."""
        order = np.argsort(self.lambdas)
        flags = self.positive[order].astype(int)
        return bool(np.all(np.diff(flags) >= 0))

    @property
    def certified(self):
        return self.gap_above >= -self.tolerance and abs(self.gap_at) <= max(self.tolerance, abs(self.gap_above))

    def to_dict(self):
        return {
            "axis": self.axis,
            "step": self.step,
            "lambda0": self.lambda0,
            "bracket": list(self.bracket),
            "tolerance": self.tolerance,
            "monotone": self.monotone,
            "certified": self.certified,
            "gap_above": self.gap_above,
            "gap_at": self.gap_at,
            "scan": [[float(l), float(g)] for l, g in zip(self.lambdas, self.gaps)],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "gap"])
        for l, g in sorted(zip(self.lambdas, self.gaps)):
            w.writerow([repr(float(l)), repr(float(g))])
        return buf.getvalue()


def critical_plane(v, axis=0, scan_range=(-2.0, 2.0), step=0.05, box=None, count=2048, seed=0,
                   singular_points=(), exclusion_radius=DEFAULT_EXCLUSION, tol=1e-12):
    """Locate ``lambda0`` by a scan from above followed by bisection.

    ``lambda0`` is the smallest scanned value such that the gap is
    nonnegative at it and at every scanned value above it; bisection then
    narrows the crossing to ``step / 2**6``.  A gap counts as negative only
    below ``-tol`` (relative to the sampled field size, plus the interpolation
    error for grid fields): for a decaying field the infimum over the
    unbounded half-space is 0, so sampled gaps far out are tiny but not
    negative.
    """
    lo, hi = scan_range
    if hi <= lo or step <= 0:
        raise ScanError("scan range must be increasing with a positive step")
    ev = _Evaluator(v, box)
    scale = float(np.nanmax(np.abs(ev(sample_sigma(ev.box, ev.box[axis, 1], axis, count, seed)))))
    thr = tol * max(1.0, scale) + ev.interp_tol * (ev.grid is not None)

    def gap(lam):
        return reflection_gap(v, lam, axis, box, count, seed, singular_points, exclusion_radius)

    lams = np.arange(hi, lo - 0.5 * step, -step)
    gaps = []
    fail = None
    for lam in lams:
        gaps.append(gap(lam))
        if gaps[-1] < -thr:
            fail = len(gaps) - 1
            break
    if fail is None:
        raise ScanError(f"gap stays nonnegative on the whole range {scan_range}; lambda0 not bracketed")
    if fail == 0:
        raise ScanError(f"gap is negative at the top of the range (lambda={hi})")
    lam_pass, lam_fail = lams[fail - 1], lams[fail]
    for _ in range(REFINE_STEPS):
        mid = 0.5 * (lam_pass + lam_fail)
        if gap(mid) >= -thr:
            lam_pass = mid
        else:
            lam_fail = mid
    scanned = np.array(lams[: fail + 1], dtype=float)
    g = np.array(gaps)
    delta = step / 2**REFINE_STEPS
    return PlaneScanResult(axis, step, scanned, g, g >= -thr, float(lam_pass),
                           (float(lam_fail), float(lam_pass)), thr,
                           gap(lam_pass + delta), gap(lam_pass))


@dataclass
class MinCheckReport:
    status: str  # "pass", "fail" or "precondition-violated"
    interior_inf: float
    boundary_inf: float
    margin: float
    worst_residual: float
    r_min: float

    @property
    def passed(self):
        return self.status == "pass"


def _operator_values(v, P, drift):
    out = v(P)
    if not isinstance(out, tuple):
        # steps shrink with |P| so stencils stay clear of the puncture
        h = 1e-3 * np.linalg.norm(P, axis=-1)
        out = (field_values(v, P), fd_gradient(v, P, h), fd_hessian(v, P, h))
    return halfspace_operator(out, P, drift)


def _unit_directions(d, count, seed):
    U = _sobol(d, count, seed)
    dirs = norm.ppf(np.clip(U, 1e-12, 1 - 1e-12))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs


def lemma25_min_check(v, params, count=4096, boundary_count=1024, r_min=1e-3, seed=0,
                      tol=1e-8, residual_tol=1e-8):
    """Minimum principle on the punctured unit ball for ``L = Delta + (2a-1)/x_d d_d``.

    ``v`` must be a supersolution, ``-L v >= 0`` on the samples up to
    ``residual_tol`` (relative), checked first.  Value-only callables get
    finite-difference derivatives.  Interior samples use radii down to ``r_min``,
    including a geometric sequence approaching the puncture.
    """
    d = params.n + 1
    rng = np.random.default_rng(seed)
    dirs = _unit_directions(d, count, seed)
    radii = r_min + (1.0 - r_min) * rng.random(count) ** (1.0 / d)
    geo = np.geomspace(r_min, 0.5, 64)
    inner = np.vstack([dirs * radii[:, None], dirs[:64] * geo[:, None]])
    inner = inner[np.linalg.norm(inner, axis=1) < 1.0]
    bdry = _unit_directions(d, boundary_count, seed + 1)

    vi, vb = field_values(v, inner), field_values(v, bdry)
    # -L v >= 0, measured against the natural size |v| / |x|^2 of second derivatives
    Lv = _operator_values(v, inner, 2.0 * params.a - 1.0)
    worst = float(np.max(Lv / (1.0 + np.abs(vi) / np.sum(inner**2, axis=-1))))
    i_inf, b_inf = float(np.min(vi)), float(np.min(vb))
    margin = i_inf - b_inf
    if worst > residual_tol:
        return MinCheckReport("precondition-violated", i_inf, b_inf, margin, worst, r_min)
    status = "pass" if margin >= -tol else "fail"
    return MinCheckReport(status, i_inf, b_inf, margin, worst, r_min)


def lemma25_min_check_grid(u: GridField, op: DiscreteOperator, tol=1e-8, residual_tol=1e-8):
    """Discrete analogue: equation-row minimum against the Dirichlet-boundary minimum."""
    Lu = op.apply(u)
    eq = op.node_class != DIRICHLET
    scale = max(1.0, float(np.max(np.abs(u.values))))
    worst = float(np.max(Lu[eq]))
    i_inf = float(np.min(u.values[eq]))
    b_inf = float(np.min(u.values[~eq]))
    margin = i_inf - b_inf
    if worst > residual_tol * scale:
        return MinCheckReport("precondition-violated", i_inf, b_inf, margin, worst, 0.0)
    status = "pass" if margin >= -tol * scale else "fail"
    return MinCheckReport(status, i_inf, b_inf, margin, worst, 0.0)


@dataclass
class SymmetryReport:
    center: np.ndarray
    max_deviation: float
    mean_deviation: float
    n_pairs: int
    tolerance: float

    @property
    def symmetric(self):
        return self.max_deviation <= self.tolerance


def symmetry_report(v, center, n_pairs=2000, radii=(0.05, 2.0), seed=0, half_space=None, tol=1e-10):
    """Largest ``|v(p) - v(q)|`` over random pairs at equal distance from ``center``.

    The centre must lie on ``x_d = 0``.  With ``half_space`` (the default for
    grid fields) both points are folded into ``x_d >= 0``.  Grid fields add
    their interpolation error to ``tol``.
    """
    c = np.asarray(center, dtype=float)
    if c[-1] != 0.0:
        raise PreconditionError("symmetry centre must have vanishing last coordinate", worst=c[-1])
    if isinstance(v, GridField):
        ev = _Evaluator(v)
        half_space = True if half_space is None else half_space
        tol = tol + ev.interp_tol
    else:
        ev = _Evaluator(v, box=[(-np.inf, np.inf)] * len(c))
    d = len(c)
    rng = np.random.default_rng(seed)
    r = rng.uniform(*radii, size=n_pairs)
    d1 = rng.standard_normal((n_pairs, d))
    d2 = rng.standard_normal((n_pairs, d))
    d1 /= np.linalg.norm(d1, axis=1, keepdims=True)
    d2 /= np.linalg.norm(d2, axis=1, keepdims=True)
    if half_space:
        d1[:, -1] = np.abs(d1[:, -1])
        d2[:, -1] = np.abs(d2[:, -1])
    P = c + r[:, None] * d1
    Q = c + r[:, None] * d2
    ok = ev.inside(P) & ev.inside(Q)
    if not np.any(ok):
        raise DomainError("no sample pair lies inside the field's domain")
    dev = np.abs(ev(P[ok]) - ev(Q[ok]))
    return SymmetryReport(c, float(np.max(dev)), float(np.mean(dev)), int(np.sum(ok)), tol)
