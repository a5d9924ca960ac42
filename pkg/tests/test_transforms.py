import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenliouville import DomainError, ParameterError, PreconditionError, ProblemParams
from degenliouville.exact import (BubbleParams, bubble_field, lifted_bubble_field, residual_001,
                                  residual_halfspace)
from degenliouville.fields import fd_hessian, linear_field
from degenliouville.operator_field import model_operator, rotated
from degenliouville.transforms import (BlowupFrame, blowup_case1, blowup_case1_map, blowup_case2,
                                       blowup_case2_map, boundary_flatten, case1_rescaled_residual,
                                       cylindrical_lift, cylindrical_map, dimension_lift, even_reflect,
                                       kelvin, kelvin_map, plane_reflection_map, reflect_plane,
                                       sqrt_substitution, sqrt_substitution_map)

P4 = ProblemParams.critical(1, 1.5)
# Frozen output of tests/oracles.py: Kelvin image of the lifted bubble (t=1, x0=0.3) at (0.7, 0.4)
KELVIN_AT_07_04 = 2.1951316451270393


def quadratic_field(P):
    """A smooth non-solution used for chain-rule checks."""
    x, y = P[..., 0], P[..., 1]
    val = 1 + x**2 * y + 0.5 * y**2 + np.sin(x)
    g = np.stack([2 * x * y + np.cos(x), x**2 + y], axis=-1)
    H = np.zeros(P.shape + (2,))
    H[..., 0, 0] = 2 * y - np.sin(x)
    H[..., 0, 1] = H[..., 1, 0] = 2 * x
    H[..., 1, 1] = 1.0
    return val, g, H


def test_cylindrical_lift_of_linear_field():
    F = cylindrical_lift(linear_field([0.0, 1.0]), 1)
    P = np.array([[0.3, 0.0], [0.1, 1.0], [-2.0, 3.0]])
    val, g, H = F(P)
    np.testing.assert_allclose(val, P[:, 1] ** 2 / 4, rtol=1e-15)
    np.testing.assert_allclose(g[:, 1], P[:, 1] / 2, rtol=1e-15)
    np.testing.assert_allclose(H[:, 1, 1], 0.5, rtol=1e-15)


def test_cylindrical_lift_has_no_normal_derivative_on_face():
    F = cylindrical_lift(quadratic_field, 1)
    P = np.column_stack([np.linspace(-2, 2, 9), np.zeros(9)])
    assert np.all(F(P)[1][:, 1] == 0.0)


def test_chain_consistency_with_lifted_residual():
    params = ProblemParams(1, 1.5, 2.0)
    rng = np.random.default_rng(0)
    P = np.column_stack([rng.uniform(-2, 2, 300), rng.uniform(0, 3, 300)])
    Q = P.copy()
    Q[:, 1] = 2 * np.sqrt(P[:, 1])
    lhs = residual_001(quadratic_field, params, P)
    rhs = residual_halfspace(cylindrical_lift(quadratic_field, 1), params, Q)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_lift_of_bubble_solves_lifted_equation():
    F = cylindrical_lift(bubble_field(P4, BubbleParams(1.0, 0.4)), 1)
    rng = np.random.default_rng(1)
    P = np.column_stack([rng.uniform(-3, 3, 300), rng.uniform(0, 4, 300)])
    assert np.max(np.abs(residual_halfspace(F, P4, P))) <= 1e-8
    G = lifted_bubble_field(P4, BubbleParams(1.0, 0.4))
    np.testing.assert_allclose(F(P)[0], G(P)[0], rtol=1e-14)


def test_even_reflection():
    G = even_reflect(lifted_bubble_field(P4, BubbleParams(1.0, 0.2)), 1)
    P = np.array([[0.3, 0.7], [-1.0, 2.0]])
    Pm = P * [1, -1]
    assert np.array_equal(G(P)[0], G(Pm)[0])
    with pytest.raises(PreconditionError):
        even_reflect(linear_field([0.0, 1.0]), 1)


def test_even_reflection_is_twice_differentiable_across_face():
    G = even_reflect(lifted_bubble_field(P4, BubbleParams(1.0, 0.2)), 1)
    x = 0.35
    exact = G(np.array([x, 0.0]))[2][1, 1]
    errs = []
    for h in (0.1, 0.05, 0.025, 0.0125):
        vals = G(np.array([[x, h], [x, 0.0], [x, -h]]))[0]
        errs.append(abs((vals[0] - 2 * vals[1] + vals[2]) / h**2 - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_dimension_lift_to_three_dimensions():
    params = ProblemParams.critical(2, 0.5, allow_weak_drift=True)
    assert params.alpha == pytest.approx(5.0)
    V = dimension_lift(lifted_bubble_field(params, BubbleParams(1.0, (0.1, 0.0))), params, 1)
    rng = np.random.default_rng(2)
    P = rng.uniform(-2, 2, (400, 3))
    P = P[np.abs(P[:, 2]) > 1e-3]
    val, _, H = V(P)
    res = np.trace(H, axis1=1, axis2=2) + val**5
    assert np.max(np.abs(res)) <= 1e-8
    with pytest.raises(ParameterError):
        dimension_lift(lifted_bubble_field(params, BubbleParams(1.0, (0.1, 0.0))), params, 2)


def test_dimension_lift_laplacian_matches_differences():
    params = ProblemParams.critical(1, 1.0, allow_weak_drift=True)
    V = dimension_lift(lifted_bubble_field(params, BubbleParams(1.0, 0.0)), params, 2)
    rng = np.random.default_rng(3)
    for p in rng.uniform(-1.5, 1.5, (10, 3)):
        H = V(p)[2]
        Hfd = fd_hessian(lambda Q: V(Q)[0], p)
        assert abs(np.trace(H) - np.trace(Hfd)) <= 1e-7
        assert abs(np.trace(H) + V(p)[0] ** params.alpha) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-1, 1), st.floats(0.1, 2.0))
def test_dimension_lift_depends_on_radius_of_extra_variables(theta, x, r):
    params = ProblemParams.critical(1, 1.0, allow_weak_drift=True)
    V = dimension_lift(lifted_bubble_field(params, BubbleParams(1.0, 0.0)), params, 2)
    a = V(np.array([x, r, 0.0]))[0]
    b = V(np.array([x, r * np.cos(theta), r * np.sin(theta)]))[0]
    assert a == pytest.approx(b, rel=1e-14)


def test_kelvin_value_matches_symbolic_oracle():
    v = kelvin(lifted_bubble_field(P4, BubbleParams(1.0, 0.3)), P4)
    assert v(np.array([0.7, 0.4]))[0] == pytest.approx(KELVIN_AT_07_04, rel=1e-13)


def test_kelvin_image_solves_equation_and_is_involution():
    ubar = lifted_bubble_field(P4, BubbleParams(1.0, 0.3))
    v = kelvin(ubar, P4)
    rng = np.random.default_rng(4)
    d = rng.standard_normal((1000, 2))
    d[:, 1] = np.abs(d[:, 1])
    P = d / np.linalg.norm(d, axis=1, keepdims=True) * rng.uniform(0.2, 5, (1000, 1))
    assert np.max(np.abs(residual_halfspace(v, P4, P, tau=0.0))) <= 1e-7
    back = kelvin(v, P4)(P)
    np.testing.assert_allclose(back[0], ubar(P)[0], rtol=1e-12)
    np.testing.assert_allclose(back[1], ubar(P)[1], rtol=1e-9, atol=1e-12)


def test_kelvin_weight_for_subcritical_exponent():
    params = ProblemParams(1, 1.5, 2.0)
    assert params.tau == pytest.approx(2.0)
    ubar = lifted_bubble_field(params, BubbleParams(1.0, 0.3), unchecked=True)
    rng = np.random.default_rng(5)
    P = np.column_stack([rng.uniform(-3, 3, 200), rng.uniform(0.1, 3, 200)])
    rho2 = np.sum(P**2, axis=1)
    lhs = residual_halfspace(kelvin(ubar, params), params, P, tau=params.tau)
    rhs = rho2 ** (-(4 + 2) / 2) * residual_halfspace(ubar, params, P / rho2[:, None])
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)


def test_reflect_plane_examples():
    np.testing.assert_array_equal(reflect_plane(np.array([1.0, 2.0, 3.0]), 0.0), [-1.0, 2.0, 3.0])
    P = np.array([[0.4, 1.0, -2.0]])
    np.testing.assert_array_equal(reflect_plane(P, 0.4), P)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), st.floats(-10, 10), st.integers(0, 1))
def test_reflect_twice_is_identity(p, lam, axis):
    P = np.array(p)
    np.testing.assert_allclose(reflect_plane(reflect_plane(P, lam, axis), lam, axis), P, atol=1e-9)


def test_field_maps_round_trip():
    rng = np.random.default_rng(6)
    P2 = np.column_stack([rng.uniform(-5, 5, 1000), rng.uniform(0, 5, 1000)])
    frame = BlowupFrame((0.3, 0.2), 100.0, 3.0)
    maps = [cylindrical_map(1), kelvin_map(P4), plane_reflection_map(0.7), blowup_case1_map(frame),
            blowup_case2_map(frame), sqrt_substitution_map(0.5)]
    for m in maps:
        assert m.roundtrip_defect(P2) <= 1e-12 * (1 + np.max(np.abs(P2)))


def test_blowup_frame():
    f = BlowupFrame((0.0, 0.5), 100.0, 3.0)
    assert f.mu == pytest.approx(0.01, rel=1e-15)
    assert abs(f.mu ** (2 / (f.alpha - 1)) * f.M - 1) <= 1e-12
    with pytest.raises(ParameterError):
        BlowupFrame((0.0,), 100.0, 3.0, mu=0.5)
    with pytest.raises(ParameterError):
        BlowupFrame((0.0,), -1.0, 3.0)


def test_blowup_of_scaled_bubble_has_unit_sup():
    F = bubble_field(P4, BubbleParams(1.0, 0.0))
    peak = F(np.array([0.0, 0.0]))[0]
    M = 250.0
    c = M / peak
    scaled = lambda P: tuple(c * z for z in F(P))
    frame = BlowupFrame((0.0, 0.0), M, 3.0)
    v = blowup_case1(scaled, frame)
    Y = np.stack(np.meshgrid(np.linspace(-50, 50, 201), np.linspace(0, 50, 101)), axis=-1).reshape(-1, 2)
    assert np.max(v(Y)[0]) == pytest.approx(1.0, abs=1e-10)
    # a base point where u >= M/2 rescales to v(0) >= 1/2
    base = (0.2, 0.01)
    assert c * F(np.array(base))[0] >= M / 2
    assert blowup_case1(scaled, BlowupFrame(base, M, 3.0))(np.zeros(2))[0] >= 0.5


def test_case1_limit_residual_is_first_order_in_scale():
    op = model_operator(2.0)
    aij = lambda X: op.a(X)[0]
    h = lambda X: np.ones(X.shape[:-1])
    base = np.array([0.3, 0.5])
    Y = np.stack(np.meshgrid(np.linspace(-2, 2, 21), np.linspace(-2, 2, 21)), axis=-1).reshape(-1, 2)
    gaps = []
    for M in (1e2, 1e3, 1e4, 1e5):
        frame = BlowupFrame(base, M, 3.0)
        mu = frame.mu

        def u(X):  # concentrating family M w((x - base)/mu) with Gaussian w
            Z = (X - base) / mu
            w = np.exp(-np.sum(Z**2, axis=-1))
            g = -2 * Z * w[..., None] / mu
            H = (4 * Z[..., :, None] * Z[..., None, :] - 2 * np.eye(2)) * w[..., None, None] / mu**2
            return M * w, M * g, M * H

        v = blowup_case1(u, frame)
        r = case1_rescaled_residual(v, frame, aij, op.b, h, Y)
        r0 = case1_rescaled_residual(v, frame, aij, op.b, h, Y, limit=True)
        gaps.append((mu, np.max(np.abs(r - r0))))
    mu, g = np.array(gaps).T
    slope = np.polyfit(np.log(mu), np.log(g), 1)[0]
    assert 0.9 <= slope <= 1.1


def test_boundary_flatten_model_and_rotation():
    op = model_operator(2.5)
    rng = np.random.default_rng(7)
    X = np.column_stack([rng.uniform(-1, 1, 50), rng.uniform(0, 1, 50)])
    fc = boundary_flatten(op, X)
    np.testing.assert_allclose(fc.a22, X[:, 1], rtol=1e-15)
    assert np.all(fc.a12 == 0.0)
    np.testing.assert_allclose(fc.b2, 2.5, rtol=1e-15)
    # a22 / phi stays bounded as phi -> 0
    phis = np.logspace(-10, -1, 10)
    ratios = boundary_flatten(op, np.column_stack([np.zeros(10), phis])).a22 / phis
    assert np.all(np.abs(ratios) < 10)
    theta = 0.3
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    rot = boundary_flatten(rotated(op, theta), X @ R.T)
    np.testing.assert_allclose(rot.a22, fc.a22, atol=1e-10)


def test_case2_and_sqrt_substitution():
    frame = BlowupFrame((0.1, 0.2), 1e4, 3.0)
    p = blowup_case2(np.array([0.1 + frame.mu, 0.2 + frame.mu**2]), frame)
    np.testing.assert_allclose(p, [1.0, 1.0], rtol=1e-9)
    Pp = np.array([[0.3, 0.0], [1.0, 0.0]])
    assert np.all(sqrt_substitution(Pp, 7.0)[:, 1] == 0.0)
    p2 = np.linspace(0, 4, 9)
    np.testing.assert_allclose(sqrt_substitution(np.column_stack([p2, p2]), 0.0)[:, 1], 2 * np.sqrt(p2),
                               rtol=1e-15)
    p2 = np.linspace(-1, 1, 21)
    for c in (1e4, 1e6):
        q2 = sqrt_substitution(np.column_stack([p2, p2]), c)[:, 1]
        np.testing.assert_allclose(q2, p2 / np.sqrt(c), rtol=0.01, atol=1e-300)
    with pytest.raises(DomainError):
        sqrt_substitution(np.array([0.0, -2.0]), 1.0)
