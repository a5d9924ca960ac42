import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degenliouville import (DomainError, FitError, GeneralizedParams, ParameterError, ProblemParams,
                            critical_exponent)
from degenliouville.exact import (AsymptoticCoeffs, BubbleParams, HalfSpacePoint, asymptotic_eval,
                                  barrier_eval, bubble_eval, bubble_eval_multi, bubble_field,
                                  bubble_field_multi, bubble_grad_hess, kelvin_asymptotic_fit,
                                  kernel_h_eval, lemma25_l, lifted_bubble_field, residual_001,
                                  residual_003, residual_halfspace, residual_rows_csv)
from degenliouville.fields import constant_field, fd_gradient, fd_hessian
from degenliouville.transforms import kelvin

P4 = ProblemParams.critical(1, 1.5)

# Frozen outputs of tests/oracles.py (symbolic differentiation, 30 digits).
BUBBLE_AT_03_02 = 1.4965222882254974
BUBBLE_GRAD_AT_03_02 = [-0.47508644070650713, -3.1672429380433806]
BUBBLE_HESS_AT_03_02 = [[-1.2819792844461304, 2.0109478971704005],
                        [2.0109478971704005, 13.406319314469336]]
KERNEL_H_VALUE = 0.09946303537448768  # N = 9/2, n = 2, lambda0 = 1/2 at (-1, 0.3, 1)


def random_halfspace(rng, n, count, box=5.0):
    return np.column_stack([rng.uniform(-box, box, (count, n)), rng.uniform(0, box, count)])


@pytest.mark.parametrize("point, expected", [((0.0, 0.0), 2 * np.sqrt(2)), ((1.0, 1.0), 2 * np.sqrt(2) / 6)])
def test_bubble_values(point, expected):
    assert bubble_eval(P4, BubbleParams(1.0, 0.0), point) == pytest.approx(expected, rel=1e-15)


def test_bubble_zero_scale_is_zero():
    P = random_halfspace(np.random.default_rng(1), 2, 50)
    assert np.all(bubble_eval(ProblemParams.critical(2, 2.0), BubbleParams(0.0), P) == 0.0)


def test_bubble_requires_critical_exponent_and_nonnegative_y():
    with pytest.raises(ParameterError):
        bubble_field(ProblemParams(1, 1.5, 2.0), BubbleParams(1.0))
    with pytest.raises(DomainError):
        bubble_eval(P4, BubbleParams(1.0), (0.0, -0.1))
    with pytest.raises(DomainError):
        BubbleParams(-1.0)
    with pytest.raises(DomainError):
        HalfSpacePoint((0.0,), -1.0)


def test_bubble_derivatives_match_symbolic_oracle():
    _, g, H = bubble_grad_hess(P4, BubbleParams(1.0, 0.0), (0.3, 0.2))
    assert bubble_eval(P4, BubbleParams(1.0, 0.0), (0.3, 0.2)) == pytest.approx(BUBBLE_AT_03_02, rel=1e-14)
    np.testing.assert_allclose(g, BUBBLE_GRAD_AT_03_02, rtol=1e-13)
    np.testing.assert_allclose(H, BUBBLE_HESS_AT_03_02, rtol=1e-13)


def test_bubble_derivatives_match_sixth_order_differences():
    F = bubble_field(P4, BubbleParams(1.0, 0.0))
    f = lambda Q: F(Q)[0]
    p = np.array([0.3, 0.2])
    _, g, H = bubble_grad_hess(P4, BubbleParams(1.0, 0.0), p)
    np.testing.assert_allclose(fd_gradient(f, p), g, rtol=1e-8)
    np.testing.assert_allclose(fd_hessian(f, p), H, rtol=1e-8)


def test_bubble_centre_gradient_vanishes_and_y_derivative_formula():
    params = ProblemParams.critical(2, 1.25)
    b = BubbleParams(0.7, (0.3, -0.4))
    _, g, _ = bubble_grad_hess(params, b, (0.3, -0.4, 0.0))
    assert np.all(g[:2] == 0.0)
    P = random_halfspace(np.random.default_rng(2), 2, 200)
    u, g, _ = bubble_field(params, b)(P)
    D = 0.49 + 4 * P[:, 2] + np.sum((P[:, :2] - b.x0) ** 2, axis=1)
    np.testing.assert_allclose(g[:, 2], -(params.effective_dimension - 2) * u * 2 / D, rtol=1e-13)


@pytest.mark.parametrize("n, a, t", [(1, 1.5, 1.0), (2, 1.25, 0.5), (3, 2.0, 2.0)])
def test_bubble_residual(n, a, t):
    params = ProblemParams.critical(n, a)
    rng = np.random.default_rng(3)
    F = bubble_field(params, BubbleParams(t, rng.uniform(-1, 1, n)))
    P = random_halfspace(rng, n, 1000)
    u = F(P)[0]
    assert np.all(np.abs(residual_001(F, params, P)) <= 1e-8 * (1 + u**params.alpha))


def test_zero_field_residual_and_perturbed_exponent_sensitivity():
    P = random_halfspace(np.random.default_rng(4), 1, 1000)
    assert np.all(residual_001(constant_field(0.0), P4, P) == 0.0)
    F = bubble_field(P4, BubbleParams(1.0, 0.0))
    assert np.max(np.abs(residual_001(F, P4.with_alpha(3.1), P))) > 1e-3


def test_lifted_bubble_halfspace_residual_and_constant_source():
    F = lifted_bubble_field(P4, BubbleParams(1.0, 0.2))
    rng = np.random.default_rng(5)
    P = np.column_stack([rng.uniform(-5, 5, 500), rng.uniform(0.1, 5, 500)])
    assert np.max(np.abs(residual_halfspace(F, P4, P))) <= 1e-8
    c = 1.7
    np.testing.assert_allclose(residual_halfspace(constant_field(c), P4, P), c**3, rtol=1e-15)


def test_face_limit_form_matches_singular_form():
    # Richardson: the singular form at s and s/2 extrapolates to the face value.
    F = lifted_bubble_field(P4, BubbleParams(1.0, 0.2))
    x = 0.4
    r = lambda s: float(residual_halfspace(F, P4, np.array([[x, s]]))[0] - F(np.array([[x, s]]))[0][0] ** 3)
    face = r(0.0)
    errs = [abs(r(s) - face) for s in (1e-2, 5e-3, 2.5e-3)]
    assert errs[1] / errs[0] < 0.55 and errs[2] / errs[1] < 0.55
    # the singular quotient is even in s, so the error is O(s^2)
    extrap = (4 * r(5e-3) - r(1e-2)) / 3
    assert abs(extrap - face) < errs[1] / 10


def test_kernel_h():
    params = ProblemParams(2, 1.25, 2.0)
    val, L = kernel_h_eval(params, 0.5, np.array([-1.0, 0.3, 1.0]))
    assert val == pytest.approx(KERNEL_H_VALUE, rel=1e-13)
    assert abs(L) <= 1e-9
    val, L = kernel_h_eval(P4, 0.0, np.array([-1.0, 1.0]))
    assert abs(L) <= 1e-9
    P = np.array([[0.0, 0.5], [0.0, 2.0]])
    np.testing.assert_array_equal(kernel_h_eval(P4, 0.0, P)[0], 0.0)
    rng = np.random.default_rng(6)
    Q = np.column_stack([rng.uniform(-3, 3, 400), rng.uniform(0.05, 3, 400)])
    lam = 0.3
    v = kernel_h_eval(P4, lam, Q)[0]
    assert np.all(np.sign(v) == np.sign(lam - Q[:, 0]))


@settings(max_examples=5, deadline=None, derandomize=True)
@given(st.integers(1, 3), st.floats(1.05, 3.0), st.floats(-2.0, 2.0))
def test_kernel_h_harmonic_for_random_parameters(n, a, lam0):
    params = ProblemParams(n, a, 2.0)
    rng = np.random.default_rng(7)
    P = np.column_stack([rng.uniform(-3, 3, (200, n)), rng.uniform(0.1, 3, 200)])
    P = P[np.linalg.norm(P - np.r_[lam0, np.zeros(n)], axis=1) > 0.3]
    val, L = kernel_h_eval(params, lam0, P)
    assert np.max(np.abs(L) / (1 + np.abs(val))) <= 1e-9


def test_barriers():
    assert lemma25_l(0.5, 1.0, 4.0) == pytest.approx(-2 / 3, rel=1e-15)
    rng = np.random.default_rng(8)
    r = 0.25
    # annulus r/2 <= |X - (0, r)| <= r inside the upper half of the unit ball
    th = rng.uniform(0, 2 * np.pi, 4000)
    rad = rng.uniform(r / 2, r, 4000)
    P = np.column_stack([rad * np.cos(th), r + rad * np.sin(th)])
    P = P[P[:, 1] > 0][:500]
    rep = barrier_eval("Lemma21", P4, {"r": r}, P, beta=200.0)
    assert rep.ok and np.all(rep.L_value < 0)
    ring = np.column_stack([np.cos(th[:50]), np.abs(np.sin(th[:50]))])
    rep = barrier_eval("Lemma22", P4, {}, ring)
    assert np.max(np.abs(rep.value)) <= 1e-15
    shell = ring * rng.uniform(0.5, 1.0, (50, 1))
    assert barrier_eval("Lemma22", P4, {}, shell).ok
    rep = barrier_eval("Lemma25", P4, {"s": 0.5, "m1": 1.0}, shell * 0.99 + 0.005)
    assert rep.ok and rep.l_s == pytest.approx(-2 / 3)
    with pytest.raises(DomainError):
        barrier_eval("Lemma22", P4, {}, np.array([[0.1, 0.1]]))


def test_asymptotic_eval_and_fit():
    params = ProblemParams(1, 1.5, 2.0)
    assert asymptotic_eval(AsymptoticCoeffs(1.0, [0, 0], 4.0), params, np.array([2.0, 0.0])) == pytest.approx(0.25)
    c = AsymptoticCoeffs(2.0, [0.3, -0.1], 4.0)
    x = np.array([0.7, 1.1])
    lead = lambda Q: asymptotic_eval(AsymptoticCoeffs(2.0, [0, 0], 4.0), params, Q)
    assert lead(2 * x) == pytest.approx(lead(x) * 2.0 ** -2, rel=1e-14)
    fit = kelvin_asymptotic_fit(lambda Q: asymptotic_eval(c, params, Q), params, [10.0, 20.0, 40.0])
    assert fit.a0 == pytest.approx(2.0, abs=1e-10)
    np.testing.assert_allclose(fit.a_i, c.a_i, atol=1e-9)
    with pytest.raises(ParameterError):
        kelvin_asymptotic_fit(lead, params, [10.0, 5.0])
    with pytest.raises(FitError):
        kelvin_asymptotic_fit(lead, params, [10.0], n_directions=1)


def test_kelvin_image_leading_coefficient():
    v = kelvin(lifted_bubble_field(P4, BubbleParams(1.0, 0.0)), P4)
    fit = kelvin_asymptotic_fit(v, P4, [50.0, 100.0, 200.0])
    assert fit.a0 > 0
    assert fit.a0 == pytest.approx(2 * np.sqrt(2), rel=1e-4)


def test_generalized_bubble():
    g2 = GeneralizedParams(1, [1.5, 2.5], critical_exponent(1, 4.0))
    g1 = GeneralizedParams(1, [4.0], critical_exponent(1, 4.0))
    b = BubbleParams(1.0, 0.2)
    assert bubble_eval_multi(g2, b, (0.4, 0.3, 0.7)) == pytest.approx(bubble_eval_multi(g1, b, (0.4, 1.0)), rel=1e-14)
    assert bubble_eval_multi(g2, BubbleParams(0.0), (0.4, 0.3, 0.7)) == 0.0
    rng = np.random.default_rng(9)
    for g in (g2, GeneralizedParams(2, [1.25, 1.5, 2.0], critical_exponent(2, 4.75))):
        d = g.n + g.m
        P = np.column_stack([rng.uniform(-3, 3, (500, g.n)), rng.uniform(0, 3, (500, g.m))])
        F = bubble_field_multi(g, BubbleParams(0.8, np.zeros(g.n)))
        assert P.shape[1] == d
        assert np.max(np.abs(residual_003(F, g, P))) <= 1e-8


def test_residual_csv_rows():
    text = residual_rows_csv(np.array([[0.0, 1.0], [2.0, 3.0]]), [1.0, 2.0], [0.0, 1e-12])
    lines = text.strip().splitlines()
    assert lines[0] == "p0,p1,value,residual" and len(lines) == 3


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 3), st.floats(-1, 1))
def test_translation_covariance(x, x2, y, c):
    params = ProblemParams.critical(2, 1.5)
    a = bubble_eval(params, BubbleParams(1.3, (c, -c)), (x, x2, y))
    b = bubble_eval(params, BubbleParams(1.3, (0.0, 0.0)), (x - c, x2 + c, y))
    assert a == b


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 3), st.floats(0.2, 5.0))
def test_scaling_covariance(x, y, t):
    lhs = bubble_eval(P4, BubbleParams(t), (x, y))
    rhs = t ** (-(4 - 2) / 2) * bubble_eval(P4, BubbleParams(1.0), (x / t, y / t**2))
    assert lhs == pytest.approx(rhs, rel=1e-12)
