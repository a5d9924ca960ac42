import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenliouville import ParameterError, PreconditionError, ProblemParams
from degenliouville.exact import BubbleParams, bubble_field, kernel_h_field
from degenliouville.fd import (DIRICHLET, FACE, INTERIOR, Grid, GridField, assemble, hopf_probe,
                               hopf_probe_field, max_principle_check, solve_linear, solve_semilinear)

P4 = ProblemParams.critical(1, 1.5)
BUBBLE = bubble_field(P4, BubbleParams(1.0, 0.0))


def loop_assembly(a, grid):
    """Dense reference matrix built node by node."""
    shape = grid.shape
    h = grid.spacings
    y = grid.axes[-1]
    n = grid.n
    A = np.zeros((grid.size, grid.size))
    flat = lambda idx: np.ravel_multi_index(idx, shape)
    for idx in itertools.product(*map(range, shape)):
        r = flat(idx)
        on_x_face = any(idx[k] in (0, shape[k] - 1) for k in range(n))
        if on_x_face or idx[-1] == shape[-1] - 1:
            A[r, r] = 1.0
            continue
        for k in range(n):
            for s in (-1, 1):
                nb = list(idx)
                nb[k] += s
                A[r, flat(tuple(nb))] += 1 / h[k] ** 2
            A[r, r] -= 2 / h[k] ** 2
        j = idx[-1]
        up = list(idx)
        up[-1] += 1
        A[r, flat(tuple(up))] += a / h[-1]
        A[r, r] -= a / h[-1]
        if j > 0:
            dn = list(idx)
            dn[-1] -= 1
            A[r, flat(tuple(up))] += y[j] / h[-1] ** 2
            A[r, flat(tuple(dn))] += y[j] / h[-1] ** 2
            A[r, r] -= 2 * y[j] / h[-1] ** 2
    return A


@pytest.mark.parametrize("grid", [Grid.box(1, -1, 1, 2, 5, 5), Grid.box(2, -1, 1, 1, 4, 5),
                                  Grid(((-1, 2), (0, 3)), (6, 4))])
def test_assembly_matches_loop_oracle(grid):
    op = assemble(P4, grid)
    np.testing.assert_allclose(op.matrix.toarray(), loop_assembly(1.5, grid), rtol=1e-14, atol=1e-12)
    nnz = np.diff(op.matrix.indptr)
    assert nnz.max() <= 2 * grid.n + 3


def test_node_classes():
    cls = Grid.box(1, -1, 1, 1, 5, 4).node_class()
    assert np.all(cls[1:-1, 0] == FACE)
    assert np.all(cls[1:-1, 1:-1] == INTERIOR)
    assert np.all(cls[[0, -1], :] == DIRICHLET) and np.all(cls[:, -1] == DIRICHLET)


def test_grid_validation():
    with pytest.raises(ParameterError):
        Grid.box(1, -1, 1, 1, 2, 5)
    with pytest.raises(ParameterError):
        Grid(((-1, 1), (0.5, 1)), (5, 5))
    with pytest.raises(ParameterError):
        assemble(P4, Grid.box(1, -1, 1, 1, 5, 5), drift="downwind")


def test_operator_on_constants_and_linear_in_y():
    grid = Grid.box(2, -1, 1, 2, 7, 9)
    op = assemble(P4, grid)
    eq = op.equation_rows.reshape(grid.shape)
    assert np.all(op.apply(GridField(grid, np.full(grid.shape, 3.0)))[eq] == 0.0)
    u = GridField.sample(grid, lambda P: P[..., -1])
    np.testing.assert_allclose(op.apply(u)[eq], 1.5, rtol=1e-13)


def test_bubble_residual_converges_including_face():
    res, face = [], []
    for m in (17, 33, 65, 129):
        grid = Grid.box(1, -2, 2, 4, m, m)
        op = assemble(P4, grid)
        u = GridField.sample(grid, BUBBLE)
        r = op.apply(u) + u.values**3
        cls = grid.node_class()
        res.append(np.max(np.abs(r[cls != DIRICHLET])))
        face.append(np.max(np.abs(r[cls == FACE])))
    assert np.all(np.diff(res) < 0) and np.all(np.diff(face) < 0)
    # the observed order climbs toward the first-order limit of the upwind drift
    order = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(np.diff(order) > 0) and 0.8 < order[-1] < 1.2


def test_m_matrix_certificate_upwind_and_centred():
    for grid in (Grid.box(1, -1, 1, 1, 5, 5), Grid.box(1, -2, 2, 4, 129, 129), Grid.box(2, -1, 1, 1, 9, 9)):
        assert max_principle_check(assemble(P4, grid)).passed
    # centred drift: the lower neighbour weight y/h^2 - a/(2h) is positive when y < a h / 2
    params = ProblemParams(1, 3.0, 2.0)
    grid = Grid.box(1, -1, 1, 1, 9, 9)
    op = assemble(params, grid, drift="centered")
    cert = max_principle_check(op)
    assert not cert.passed and op.certificate is cert
    h = grid.spacings[-1]
    cls = grid.node_class()
    y = grid.points()[..., -1]
    expected = np.flatnonzero(((cls == INTERIOR) & (y < params.a * h / 2)).ravel())
    np.testing.assert_array_equal(cert.bad_offdiagonal, expected)
    assert not np.any(cls.ravel()[cert.offending_rows] == DIRICHLET)


def test_solve_linear_zero_problem_is_exact():
    grid = Grid.box(1, -1, 1, 1, 9, 9)
    assert np.all(solve_linear(assemble(P4, grid), 0.0, 0.0).values == 0.0)


def test_linear_manufactured_solution_converges():
    errs = []
    for m in (33, 65, 129):
        grid = Grid.box(1, -2, 2, 4, m, m)
        u = GridField.sample(grid, BUBBLE)
        sol = solve_linear(assemble(P4, grid), GridField(grid, -u.values**3), BUBBLE)
        errs.append(np.max(np.abs(sol.values - u.values)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios >= 1.7) & (ratios <= 4.5))


def test_discrete_minimum_principle_random_trials():
    rng = np.random.default_rng(0)
    grid = Grid.box(1, -1, 1, 2, 21, 17)
    op = assemble(P4, grid)
    for _ in range(20):
        rhs = GridField(grid, -rng.uniform(0, 5, grid.shape))
        data = GridField(grid, rng.uniform(0, 1, grid.shape))
        assert solve_linear(op, rhs, data).values.min() >= -1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.integers(0, 2**31 - 1))
def test_certified_operator_respects_boundary_minimum(m, seed):
    rng = np.random.default_rng(seed)
    grid = Grid.box(1, -1, 1, 1, 11, 9)
    op = assemble(P4, grid)
    assert max_principle_check(op).passed
    data = GridField(grid, m + rng.uniform(0, 2, grid.shape))
    sol = solve_linear(op, GridField(grid, -rng.uniform(0, 3, grid.shape)), data)
    assert sol.values.min() >= m - 1e-9


def test_semilinear_manufactured_solution():
    grid = Grid.box(1, -1, 1, 1, 65, 65)
    u = GridField.sample(grid, BUBBLE)
    res = solve_semilinear(P4, grid, BUBBLE, u)
    assert res.converged and res.iterations <= 6
    # quadratic convergence: e_{k+1} / e_k^2 stays bounded on the recorded history
    e = np.array(res.update_norms)
    e = e[e > 1e-13]
    assert np.all(e[1:] / e[:-1] ** 2 < 10.0)
    assert np.max(np.abs(res.u.values - u.values)) < 0.25


def test_semilinear_fixed_point_and_trivial_limit():
    grid = Grid.box(1, -2, 2, 4, 17, 17)
    res = solve_semilinear(P4, grid, 0.0, 0.0)
    assert res.converged and np.all(res.u.values == 0.0)
    sub = ProblemParams(1, 1.5, 2.0)
    bump = GridField.sample(grid, lambda P: 0.5 * np.exp(-np.sum((P - [0.0, 1.0]) ** 2, axis=-1)))
    res = solve_semilinear(sub, grid, 0.0, bump)
    assert res.converged and np.max(np.abs(res.u.values)) <= 1e-8
    with pytest.raises(PreconditionError):
        solve_semilinear(sub, grid, 0.0, GridField(grid, -np.ones(grid.shape)))


def test_hopf_probe():
    grid = Grid.box(1, -1, 1, 1, 9, 9)
    rep = hopf_probe(GridField(grid, np.full(grid.shape, 2.0)))
    assert rep.status == "constant" and rep.margin == 0.0
    rng = np.random.default_rng(1)
    op = assemble(P4, grid)
    for _ in range(20):
        u = solve_linear(op, GridField(grid, -rng.uniform(0.1, 2, grid.shape)), 0.0)
        rep = hopf_probe(u)
        assert rep.status == "boundary-minimum" and rep.margin > 0
    bad = GridField(grid, np.where(grid.node_class() == DIRICHLET, 1.0, 0.0))
    assert hopf_probe(bad).status == "interior-minimum"


def test_hopf_probe_on_kernel():
    # h vanishes on the plane x1 = 0 and is positive on x1 < 0
    h = kernel_h_field(P4, 0.0)
    for s in (0.3, 1.0, 2.0):
        assert hopf_probe_field(h, (0.0, s), (-1.0, 0.0)) > 0


def test_grid_field_serialisation():
    grid = Grid(((-1.0, 1.0), (0.0, 0.7)), (5, 6))
    rng = np.random.default_rng(2)
    u = GridField(grid, rng.standard_normal(grid.shape))
    blob = u.to_bytes()
    assert blob[:8] == b"DGFIELD1"
    back = GridField.from_bytes(blob)
    assert back.values.tobytes() == u.values.tobytes() and back.grid == grid
    csv_back = GridField.from_csv(u.to_csv())
    np.testing.assert_array_equal(csv_back.values, u.values)
    assert u.to_csv().splitlines()[0] == "x1,y,value"
    with pytest.raises(ParameterError):
        GridField.from_bytes(b"X" * 64)
    with pytest.raises(ParameterError):
        GridField(grid, np.full(grid.shape, np.nan))


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 7), st.integers(3, 7), st.integers(0, 2**31 - 1))
def test_binary_round_trip_is_bit_exact(nx, ny, seed):
    grid = Grid.box(1, -np.pi, np.e, 1.3, nx, ny)
    vals = np.random.default_rng(seed).standard_normal(grid.shape) * 10.0 ** np.random.default_rng(seed).integers(-300, 300)
    u = GridField(grid, vals)
    assert GridField.from_bytes(u.to_bytes()).values.tobytes() == u.values.tobytes()
