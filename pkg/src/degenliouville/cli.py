"""Command-line front end: ``degenliouville <subcommand> [--config PATH] ...``.

Every subcommand writes ``<prefix><subcommand>_summary.json`` (pass/fail per check with
margins) and, unless ``--format json``, CSV data files into ``--out``.
Exit status: 0 all checks passed, 1 a check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import acceptance, fd, moving_plane as mp, norms
from .errors import DegenLiouvilleError, DomainError, ParameterError
from .exact import (
    BubbleParams,
    bubble_field,
    kelvin_asymptotic_fit,
    lifted_bubble_field,
    residual_001,
    residual_halfspace,
    residual_rows_csv,
)
from .fichera import exponent_window, lemma41_check
from .operator_field import model_operator, perturbed_model, polynomial_operator, rotated, scaled_phi
from .params import ProblemParams, critical_exponent
from .transforms import (
    BlowupFrame,
    blowup_case1,
    blowup_case2_map,
    case1_rescaled_residual,
    cylindrical_lift,
    kelvin,
    sqrt_substitution_map,
)

SCHEMA_VERSION = 1

_SECTIONS = {
    "params": {"n", "a", "alpha", "t", "x0", "allow_weak_drift"},
    "operator": {"family", "drift", "eps", "theta", "phi_scale", "coefficients", "box"},
    "grid": {"samples", "nodes", "x_range", "y_max", "resolution", "radii", "r_range",
             "scan_range", "scan_step", "box", "axis", "ny", "levels", "magnitudes"},
    "solver": {"mode", "max_newton"},
    "tolerances": None,  # names checked per subcommand
    "outputs": {"prefix"},
}
_TOP = {"schema_version", "experiment", "seed"} | set(_SECTIONS)
_POLY_KEYS = {"a11", "a12", "a22", "b1", "b2", "phi"}


class ConfigError(ParameterError):
    pass


# -- config -----------------------------------------------------------------

def load_config(path, subcommand, tolerance_names):
    """Parse and validate a JSON config; unknown keys are errors."""
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _TOP
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    if "grid" not in cfg:
        raise ConfigError("config is missing the required 'grid' section")
    if "experiment" in cfg and cfg["experiment"] != subcommand:
        raise ConfigError(f"config is for '{cfg['experiment']}', not '{subcommand}'")
    for sec, allowed in _SECTIONS.items():
        if sec not in cfg:
            continue
        if not isinstance(cfg[sec], dict):
            raise ConfigError(f"section '{sec}' must be an object")
        allowed = set(tolerance_names) if allowed is None else allowed
        bad = set(cfg[sec]) - allowed
        if bad:
            raise ConfigError(f"unknown keys in '{sec}': {sorted(bad)}")
    coeffs = cfg.get("operator", {}).get("coefficients")
    if coeffs is not None:
        if not isinstance(coeffs, dict) or set(coeffs) != _POLY_KEYS:
            raise ConfigError(f"polynomial coefficients need exactly {sorted(_POLY_KEYS)}")
    return cfg


def _section(cfg, name, defaults):
    out = dict(defaults)
    out.update(cfg.get(name, {}))
    return out


def _problem(cfg, defaults):
    p = _section(cfg, "params", defaults)
    n, a = int(p["n"]), float(p["a"])
    alpha = p.get("alpha")
    alpha = critical_exponent(n, a) if alpha is None else float(alpha)
    params = ProblemParams(n, a, alpha, bool(p.get("allow_weak_drift", False)))
    x0 = np.broadcast_to(np.asarray(p.get("x0", 0.0), dtype=float), (n,))
    return params, BubbleParams(float(p.get("t", 1.0)), x0)


def _operator(cfg):
    o = _section(cfg, "operator", {"family": "model", "drift": 2.0})
    fam = o["family"]
    box = tuple(tuple(b) for b in o["box"]) if "box" in o else None
    if fam == "model":
        op = model_operator(float(o["drift"]), box=box or ((-1.0, 1.0), (-1.0, 1.0)))
    elif fam == "perturbed":
        op = perturbed_model(float(o["drift"]), float(o.get("eps", 0.1)),
                             box=box or ((-np.pi, np.pi), (-1.0, 1.0)))
    elif fam == "polynomial":
        c = o.get("coefficients")
        if c is None:
            raise ConfigError("polynomial family needs 'coefficients'")
        op = polynomial_operator(c["a11"], c["a12"], c["a22"], c["b1"], c["b2"], c["phi"],
                                 box=box or ((-1.0, 1.0), (-1.0, 1.0)))
    else:
        raise ConfigError(f"unknown operator family '{fam}'")
    if "theta" in o:
        op = rotated(op, float(o["theta"]))
    if "phi_scale" in o:
        op = scaled_phi(op, float(o["phi_scale"]))
    return op


# -- output -----------------------------------------------------------------

def _atomic_write(path: Path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd_, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd_, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_bytes(path: Path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd_, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd_, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


def dumps(obj):
    """Deterministic JSON text."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _check(name, value, tolerance, passed=None, kind="max"):
    """One check record; ``kind='max'`` passes when ``value <= tolerance``."""
    if passed is None:
        passed = value <= tolerance if kind == "max" else value >= tolerance
    margin = (tolerance - value) if kind == "max" else (value - tolerance)
    return {"name": name, "value": value, "tolerance": tolerance, "margin": margin, "passed": bool(passed)}


class Run:
    """Collects checks and files for one subcommand invocation."""

    def __init__(self, args, subcommand):
        self.args = args
        self.sub = subcommand
        self.checks = []
        self.info = {}
        self.csv = {}
        self.binary = {}

    def tol(self, cfg, name, default):
        return float(cfg.get("tolerances", {}).get(name, default)) * self.args.tol_scale

    def finish(self, prefix=""):
        out = Path(self.args.out)
        summary = {"subcommand": self.sub, "seed": self.args.seed, "tol_scale": self.args.tol_scale,
                   "passed": all(c["passed"] for c in self.checks), "checks": self.checks}
        summary.update(self.info)
        if self.args.format in ("json", "both"):
            _atomic_write(out / f"{prefix}{self.sub}_summary.json", dumps(summary))
        if self.args.format in ("csv", "both"):
            for name, text in self.csv.items():
                _atomic_write(out / f"{prefix}{name}", text)
            for name, data in self.binary.items():
                _atomic_write_bytes(out / f"{prefix}{name}", data)
        return 0 if summary["passed"] else 1


# -- subcommands ------------------------------------------------------------

def cmd_verify_bubble(cfg, run):
    params, bubble = _problem(cfg, {"n": 1, "a": 1.5, "t": 1.0})
    g = _section(cfg, "grid", {"samples": 10_000, "box": 4.0, "y_max": 4.0})
    rng = np.random.default_rng(run.args.seed)
    n = params.n
    x0 = bubble.center(n)
    count = int(g["samples"])
    P = np.hstack([x0 + rng.uniform(-g["box"], g["box"], (count, n)),
                   rng.uniform(0.0, g["y_max"], (count, 1))])
    F = bubble_field(params, bubble)
    u = F(P)[0]
    res = residual_001(F, params, P)
    scaled = float(np.max(np.abs(res) / (1.0 + u**params.alpha)))
    run.checks.append(_check("bubble_residual", scaled, run.tol(cfg, "residual", 1e-8)))
    # same bubble in lifted coordinates s = 2 sqrt(y)
    Q = np.hstack([P[:, :n], 2.0 * np.sqrt(P[:, n:])])
    lifted = float(np.max(np.abs(residual_halfspace(lifted_bubble_field(params, bubble), params, Q))
                          / (1.0 + u**params.alpha)))
    run.checks.append(_check("lifted_residual", lifted, run.tol(cfg, "residual", 1e-8)))
    lift_gap = float(np.max(np.abs(cylindrical_lift(F, n)(Q)[0] - lifted_bubble_field(params, bubble)(Q)[0])))
    run.checks.append(_check("lift_consistency", lift_gap, run.tol(cfg, "lift", 1e-12)))
    run.info.update(params=params.to_dict(), t=bubble.t, x0=list(x0), samples=count, max_residual=scaled)
    run.csv["bubble_residuals.csv"] = residual_rows_csv(P, u, res)


def cmd_fichera(cfg, run):
    op = _operator(cfg)
    g = _section(cfg, "grid", {"resolution": 1000})
    rep = exponent_window(op, resolution=int(g["resolution"]))
    l41 = lemma41_check(op, resolution=min(200, int(g["resolution"])))
    run.checks.append(_check("g_finite", float(np.all(np.isfinite(rep.g))), 1.0, kind="min"))
    run.checks.append(_check("window_nonempty", rep.window[1], 1.0, passed=rep.window[1] > 1.0, kind="min"))
    d = rep.to_dict()
    d.pop("samples")
    run.info.update(report=d, window_upper=rep.window[1],
                    lemma41={**l41.to_dict(), "note": "reported, not gating"})
    run.csv["fichera_boundary.csv"] = rep.to_csv()


def cmd_kelvin_check(cfg, run):
    params, bubble = _problem(cfg, {"n": 1, "a": 1.5, "t": 1.0, "x0": 0.3})
    g = _section(cfg, "grid", {"samples": 1000, "r_range": [0.2, 5.0], "radii": [50.0, 100.0, 200.0]})
    rng = np.random.default_rng(run.args.seed)
    d = params.n + 1
    L = lifted_bubble_field(params, bubble)
    K = kelvin(L, params)
    dirs = rng.standard_normal((int(g["samples"]), d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    P = dirs * rng.uniform(*g["r_range"], (len(dirs), 1))
    res = residual_halfspace(K, params, P, tau=0.0)
    run.checks.append(_check("kelvin_residual", float(np.max(np.abs(res))), run.tol(cfg, "residual", 1e-7)))
    inv = float(np.max(np.abs(kelvin(K, params)(P)[0] - L(P)[0]) / np.maximum(1.0, np.abs(L(P)[0]))))
    run.checks.append(_check("involution_defect", inv, run.tol(cfg, "involution", 1e-10)))
    fit = kelvin_asymptotic_fit(K, params, g["radii"], seed=run.args.seed)
    u0 = float(L(np.zeros((1, d)))[0][0])
    rel = abs(fit.a0 - u0) / u0
    run.checks.append(_check("asymptotic_a0", rel, run.tol(cfg, "asymptotic", 1e-4), passed=rel <= run.tol(cfg, "asymptotic", 1e-4) and fit.a0 > 0))
    run.info.update(params=params.to_dict(), a0=fit.a0, a_i=list(fit.a_i), u_at_origin=u0)
    run.csv["kelvin_residuals.csv"] = residual_rows_csv(P, K(P)[0], res)


def _convergence_csv(hs, errs):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["h", "error"])
    for h, e in zip(hs, errs):
        w.writerow([repr(float(h)), repr(float(e))])
    return buf.getvalue()


def cmd_solve(cfg, run):
    params, bubble = _problem(cfg, {"n": 1, "a": 1.5, "t": 1.0})
    g = _section(cfg, "grid", {"nodes": [65, 129, 257], "x_range": [-1.0, 1.0], "y_max": 1.0})
    s = _section(cfg, "solver", {"mode": "semilinear", "max_newton": 30})
    if s["mode"] not in ("linear", "semilinear"):
        raise ConfigError(f"unknown solver mode '{s['mode']}'")
    B = bubble_field(params, bubble)
    hs, errs, steps = [], [], []
    certs = True
    last = None
    for m in g["nodes"]:
        grid = fd.Grid.box(params.n, *g["x_range"], g["y_max"], int(m), int(m))
        op = fd.assemble(params, grid)
        certs &= fd.max_principle_check(op).passed
        ub = fd.GridField.sample(grid, B)
        if s["mode"] == "linear":
            u = fd.solve_linear(op, fd.GridField(grid, -ub.values**params.alpha), ub)
            steps.append(0)
        else:
            res = fd.solve_semilinear(params, grid, ub, ub, int(s["max_newton"]), op=op)
            if not res.converged:
                run.checks.append(_check(f"newton_converged_{m}", 0.0, 1.0, passed=False, kind="min"))
            u = res.u
            steps.append(res.iterations)
        hs.append(float(grid.spacings[-1]))
        errs.append(float(np.max(np.abs(u.values - ub.values))))
        last = u
    run.checks.append(_check("m_matrix", float(certs), 1.0, kind="min"))
    orders = [float(np.log2(errs[i] / errs[i + 1])) for i in range(len(errs) - 1)]
    lo, hi = run.tol(cfg, "order_min", 0.9), cfg.get("tolerances", {}).get("order_max", 2.2)
    for i, o in enumerate(orders):
        run.checks.append(_check(f"order_{i}", o, lo, passed=lo <= o <= hi, kind="min"))
    run.info.update(params=params.to_dict(), h=hs, errors=errs, orders=orders, newton_steps=steps,
                    mode=s["mode"])
    run.csv["convergence.csv"] = _convergence_csv(hs, errs)
    run.csv["solution.csv"] = last.to_csv()
    run.binary["solution.dgf"] = last.to_bytes()


def cmd_moving_plane(cfg, run):
    params, bubble = _problem(cfg, {"n": 1, "a": 1.5, "t": 1.0, "x0": 0.7})
    g = _section(cfg, "grid", {"scan_range": [-1.0, 2.0], "scan_step": 0.05, "samples": 2048,
                               "box": 5.0, "axis": 0})
    L = lifted_bubble_field(params, bubble)
    d = params.n + 1
    axis = int(g["axis"])
    if axis >= params.n:
        raise ConfigError("scan axis must be tangential")
    box = [(-g["box"], g["box"])] * d
    res = mp.critical_plane(L, axis, tuple(g["scan_range"]), float(g["scan_step"]), box=box,
                            count=int(g["samples"]), seed=run.args.seed)
    center = np.append(bubble.center(params.n), 0.0)
    err = abs(res.lambda0 - center[axis])
    run.checks.append(_check("lambda0_at_center", err, float(g["scan_step"]) * run.args.tol_scale))
    sym = mp.symmetry_report(L, center, seed=run.args.seed)
    run.checks.append(_check("radial_symmetry", sym.max_deviation, run.tol(cfg, "symmetry", 1e-10)))
    run.info.update(scan=res.to_dict(), symmetry={"max": sym.max_deviation, "pairs": sym.n_pairs})
    run.csv["plane_scan.csv"] = res.to_csv()


def _gaussian_profile(d):
    def w(Y):
        Y = np.atleast_2d(Y)
        val = np.exp(-np.sum(Y * Y, axis=-1))
        grad = -2.0 * Y * val[..., None]
        hess = (4.0 * Y[..., :, None] * Y[..., None, :] - 2.0 * np.eye(d)) * val[..., None, None]
        return val, grad, hess
    return w


def cmd_blowup(cfg, run):
    """Case 1 on a concentrating family ``u_k = M w((x - base) / mu)``; Case 2 map round trips."""
    params, _ = _problem(cfg, {"n": 1, "a": 1.5})
    g = _section(cfg, "grid", {"magnitudes": [1e2, 1e4, 1e6], "samples": 500})
    rng = np.random.default_rng(run.args.seed)
    n = params.n
    d = n + 1
    base = np.append(np.zeros(n), 1.0)
    a = params.a

    def aij(X):
        A = np.zeros(X.shape[:-1] + (d, d))
        A[..., np.arange(n), np.arange(n)] = 1.0
        A[..., n, n] = X[..., n]
        return A

    def bi(X):
        b = np.zeros(X.shape)
        b[..., n] = a
        return b

    one = lambda X: np.ones(X.shape[:-1])
    w = _gaussian_profile(d)
    Y = rng.uniform(-1.0, 1.0, (int(g["samples"]), d))
    exact, gap, mus = [], [], []
    for M in g["magnitudes"]:
        fr = BlowupFrame(tuple(base), float(M), params.alpha)
        mu = fr.mu

        def u(X, M=M, mu=mu):
            val, gr, H = w((X - base) / mu)
            return M * val, (M / mu) * gr, (M / mu**2) * H

        v = blowup_case1(u, fr)
        X = base + mu * Y
        uv, ug, uH = u(X)
        orig = np.einsum("...ij,...ij->...", aij(X), uH) + np.sum(bi(X) * ug, -1) + uv**params.alpha
        resc = case1_rescaled_residual(v, fr, aij, bi, one, Y)
        scale = np.abs(resc) + 1.0
        exact.append(float(np.max(np.abs(resc - fr.value_scale * mu**2 * orig) / scale)))
        lim = case1_rescaled_residual(v, fr, aij, bi, one, Y, limit=True)
        gap.append(float(np.max(np.abs(lim - resc))))
        mus.append(mu)
    run.checks.append(_check("case1_rescaling_identity", max(exact), run.tol(cfg, "residual", 1e-8)))
    slope = float(np.polyfit(np.log(mus), np.log(gap), 1)[0])
    run.checks.append(_check("case1_limit_order", slope, 0.9, passed=0.9 <= slope <= 1.1, kind="min"))
    fr = BlowupFrame((0.2, 0.3), 1e4, params.alpha)
    P2 = rng.uniform(-1.0, 1.0, (int(g["samples"]), 2))
    rt2 = blowup_case2_map(fr).roundtrip_defect(P2)
    Ps = np.column_stack([P2[:, 0], np.abs(P2[:, 1])])
    rts = sqrt_substitution_map(0.3).roundtrip_defect(Ps)
    run.checks.append(_check("case2_roundtrip", float(rt2), run.tol(cfg, "roundtrip", 1e-12)))
    run.checks.append(_check("sqrt_roundtrip", float(rts), run.tol(cfg, "roundtrip", 1e-12)))
    run.info.update(mu=mus, limit_gap=gap, limit_order=slope)


def cmd_norms(cfg, run):
    g = _section(cfg, "grid", {"ny": 16001, "levels": 4})
    rng = np.random.default_rng(run.args.seed)
    x = np.arange(64) * 2 * np.pi / 64
    f = norms.PeriodicGridField(rng.standard_normal((64, 8)), (x,), np.linspace(0, 1, 8), (2 * np.pi,))
    h = f.with_values(rng.standard_normal((64, 8)))
    sym = float(abs(np.sum(norms.lambda1(f).values * h.values) - np.sum(f.values * norms.lambda1(h).values)))
    run.checks.append(_check("lambda1_self_adjoint", sym, run.tol(cfg, "spectral", 1e-10)))
    v = norms.PeriodicGridField.sample(lambda P: np.exp(-P[..., -1]) * np.sin(P[..., 0]),
                                       2 * np.pi, 16, 20.0, int(g["ny"]))
    rep = norms.iq_norm(v, 2)
    exact = {"y_vyy": np.pi / 4, "lambda1sq_v": np.pi / 2, "sqrty_lambda1_vy": np.pi / 4,
             "vy": np.pi / 2, "v": np.pi / 2}
    iq = float(max(abs(rep.terms[k] - np.sqrt(e)) for k, e in exact.items()))
    run.checks.append(_check("iq_separable", iq, run.tol(cfg, "iq", 1e-6)))
    ib = norms.ibeta_seminorm(v, 0.5, pair_budget=10**5, random_pairs=0)
    params = ProblemParams.critical(1, 1.5)
    u = bubble_field(params, BubbleParams(1.0, [0.0]))
    r, h0 = 0.5, 0.5 / 16
    eps = [2 * h0, 4 * h0, 8 * h0]
    reps = [norms.energy_estimate_check(u, 1.0, 0.0, 0.0, params.a, lambda P, w: w**params.alpha, r,
                                        h=h0 / 2**k, eps_list=eps) for k in range(int(g["levels"]))]
    defects = np.array([[s["defect"] for s in e.sweep] for e in reps])
    ratio = float(np.max(defects[1:] / defects[:-1]))
    run.checks.append(_check("energy_defect_ratio", ratio, run.tol(cfg, "energy_ratio", 0.6)))
    run.checks.append(_check("energy_bounded", float(all(e.bounded for e in reps)), 1.0, kind="min"))
    run.info.update(iq=rep.to_dict(), ibeta=ib.to_dict(), energy=reps[-1].to_dict())
    run.csv["multiplier_table.csv"] = norms.multiplier_table_csv(f)


def cmd_accept(cfg, run):
    only = cfg.get("grid", {}).get("levels") if cfg else None
    results = acceptance.run_all(seed=run.args.seed, tol_scale=run.args.tol_scale, only=only)
    for r in results:
        print(r.line())
        run.checks.append({"name": f"criterion_{r.number:02d}", "passed": r.passed or not r.gating,
                           "gating": r.gating, "criterion_passed": r.passed,
                           "metrics": r.to_dict()["metrics"]})


# -- plots ------------------------------------------------------------------

def _read_csv(path):
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    return (rows[0] if rows else []), rows[1:]


def plot_script(csv_path):
    """gnuplot script text for a CSV produced by one of the subcommands."""
    header, rows = _read_csv(csv_path)
    name = Path(csv_path).name
    lines = ["# gnuplot script", "set datafile separator ','", "set key off"]
    if not rows:
        lines += [f"# warning: {name} has no data rows; nothing to plot"]
        return "\n".join(lines) + "\n"
    if header[:2] == ["lambda", "gap"]:
        lines += ["set xlabel 'lambda'", "set ylabel 'reflection gap'",
                  f"plot '{name}' every ::1 using 1:2 with linespoints"]
    elif header[:2] == ["h", "error"]:
        data = np.array(rows, dtype=float)
        slope = float(np.polyfit(np.log(data[:, 0]), np.log(data[:, 1]), 1)[0]) if len(data) > 1 else float("nan")
        lines += ["set logscale xy", "set xlabel 'h'", "set ylabel 'max error'",
                  f"set title 'observed order {slope:.3f}'",
                  f"plot '{name}' every ::1 using 1:2 with linespoints"]
    elif header[:3] == ["x1", "x2", "g"]:
        lines += ["set xlabel 'x1'", "set ylabel 'g'",
                  f"plot '{name}' every ::1 using 1:3 with lines"]
    else:
        lines += [f"# columns: {', '.join(header)}",
                  f"plot '{name}' every ::1 using 1:{len(header)} with points"]
    return "\n".join(lines) + "\n"


def cmd_plots(args):
    paths = [Path(p) for p in args.csv]
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        print(f"error: missing CSV input(s): {', '.join(missing)}", file=sys.stderr)
        return 2
    scripts = {p.with_suffix(".gp").name: plot_script(p) for p in paths}
    for name, text in scripts.items():
        _atomic_write(Path(args.out) / name, text)
    return 0


# -- entry point ------------------------------------------------------------

COMMANDS = {
    "verify-bubble": (cmd_verify_bubble, ["residual", "lift"]),
    "fichera": (cmd_fichera, []),
    "kelvin-check": (cmd_kelvin_check, ["residual", "involution", "asymptotic"]),
    "solve": (cmd_solve, ["order_min", "order_max"]),
    "moving-plane": (cmd_moving_plane, ["symmetry"]),
    "blowup": (cmd_blowup, ["residual", "roundtrip"]),
    "norms": (cmd_norms, ["spectral", "iq", "energy_ratio"]),
    "accept": (cmd_accept, []),
}

_HELP = {
    "verify-bubble": "pointwise residual of the critical bubble and its lift",
    "fichera": "boundary ratio and exponent window for an operator family",
    "kelvin-check": "Kelvin image residual, involution and decay coefficient",
    "solve": "finite-difference solves with a refinement study",
    "moving-plane": "scan for the critical plane of a sample field",
    "blowup": "blow-up rescalings and boundary flattening round trips",
    "norms": "spectral half-Laplacian, I_q norms and the energy identity",
    "accept": "run the acceptance checks (subset via grid.levels)",
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config path")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized samples")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    common.add_argument("--format", choices=("json", "csv", "both"), default="both")
    parser = argparse.ArgumentParser(prog="degenliouville", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    p = sub.add_parser("plots", parents=[common], help="write gnuplot scripts for CSV outputs")
    p.add_argument("csv", nargs="+")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.tol_scale <= 0:
        print("error: --tol-scale must be positive", file=sys.stderr)
        return 2
    if args.command == "plots":
        return cmd_plots(args)
    fn, tol_names = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, args.command, tol_names) if args.config else {}
        if args.seed is None:
            args.seed = int(cfg.get("seed", 0))
        run = Run(args, args.command)
        fn(cfg, run)
    except (ConfigError, ParameterError, DomainError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenLiouvilleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    prefix = cfg.get("outputs", {}).get("prefix", "")
    return run.finish(prefix)


if __name__ == "__main__":
    sys.exit(main())
