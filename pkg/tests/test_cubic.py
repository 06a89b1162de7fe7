import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saddlecr.cubic import (
    secular_phi,
    solve_cubic_step,
    solve_theta,
    step_residual,
)

# scalar toy anchor: g = F(0,0), J = DF(0,0)
G = np.array([0.0, 1.0])
J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def bisection_root(gnorm_sq_poly_rhs, lo=1e-12, hi=1e6, iters=200):
    """Root of t^2 (t^2 + 1) = rhs by plain bisection (skew 2x2 case)."""

    def h(t):
        return t * t * (t * t + 1.0) - gnorm_sq_poly_rhs

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_hand_root_h1():
    theta = solve_theta(G, J, H=1.0)
    assert theta == pytest.approx(2.349638, abs=1e-6)
    assert theta == pytest.approx(bisection_root(36.0), abs=1e-9)


def test_hand_root_h2():
    theta = solve_theta(G, J, H=2.0)
    assert theta == pytest.approx(bisection_root(144.0), abs=1e-9)
    # closed form: theta^2 = (-1 + sqrt(577)) / 2
    assert theta == pytest.approx(np.sqrt((-1.0 + np.sqrt(577.0)) / 2.0), rel=1e-12)


def test_step_matches_hand_numbers():
    res = solve_cubic_step(np.zeros(2), G, J, H=1.0)
    np.testing.assert_allclose(res.z_new, [0.153355, -0.360330], atol=1e-6)
    assert res.step_norm == pytest.approx(res.theta / 6.0, rel=1e-10)
    assert res.residual < 1e-10


def test_phi_value_and_derivative():
    phi, dphi = secular_phi(G, J, H=1.0, theta=2.0)
    # ||(J + 2I)^{-1} g|| = 1/sqrt(5), minus theta/6
    assert phi == pytest.approx(1.0 / np.sqrt(5.0) - 2.0 / 6.0, rel=1e-12)
    h = 1e-6
    phi_p, _ = secular_phi(G, J, 1.0, 2.0 + h)
    phi_m, _ = secular_phi(G, J, 1.0, 2.0 - h)
    assert dphi == pytest.approx((phi_p - phi_m) / (2 * h), rel=1e-5)


def test_zero_gradient_gives_zero_step():
    res = solve_cubic_step(np.ones(2), np.zeros(2), J, H=5.0)
    assert res.theta == 0.0
    np.testing.assert_array_equal(res.z_new, np.ones(2))


def _random_monotone(rng, d):
    B = rng.standard_normal((d, d))
    sym = B @ B.T / d
    C = rng.standard_normal((d, d))
    skew = (C - C.T) / 2.0
    return sym + skew


@pytest.mark.parametrize("d", [2, 4, 10])
def test_residual_random_instances(d):
    rng = np.random.default_rng(100 + d)
    for _ in range(20):
        Jr = _random_monotone(rng, d)
        g = rng.standard_normal(d)
        H = 10.0 ** rng.uniform(-3, 3)
        res = solve_cubic_step(np.zeros(d), g, Jr, H)
        assert res.residual <= 1e-8 * (1.0 + np.linalg.norm(g))
        assert abs(res.theta - 6.0 * H * res.step_norm) <= 1e-8 * (1.0 + res.theta)
        assert step_residual(np.zeros(d), res.z_new, g, Jr, H) == pytest.approx(
            res.residual, abs=1e-12
        )


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    log_h=st.floats(-2, 2),
    t1=st.floats(0.01, 50.0),
    scale=st.floats(0.1, 5.0),
)
def test_phi_strictly_decreasing(seed, log_h, t1, scale):
    rng = np.random.default_rng(seed)
    d = 4
    Jr = _random_monotone(rng, d)
    g = scale * rng.standard_normal(d)
    H = 10.0 ** log_h
    t2 = t1 * 1.5 + 0.1
    p1, d1 = secular_phi(g, Jr, H, t1)
    p2, _ = secular_phi(g, Jr, H, t2)
    assert p2 < p1
    assert d1 < 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), theta=st.floats(0.05, 20.0))
def test_phi_derivative_vs_finite_difference(seed, theta):
    rng = np.random.default_rng(seed)
    d = 5
    Jr = _random_monotone(rng, d)
    g = rng.standard_normal(d)
    _, dphi = secular_phi(g, Jr, 1.0, theta)
    h = 1e-6 * (1.0 + theta)
    pp, _ = secular_phi(g, Jr, 1.0, theta + h)
    pm, _ = secular_phi(g, Jr, 1.0, theta - h)
    fd = (pp - pm) / (2 * h)
    assert dphi == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_theta_hint_reaches_same_root():
    rng = np.random.default_rng(3)
    Jr = _random_monotone(rng, 6)
    g = rng.standard_normal(6)
    t_cold = solve_theta(g, Jr, 2.0)
    t_warm = solve_theta(g, Jr, 2.0, theta_hint=t_cold * 3.7)
    assert t_warm == pytest.approx(t_cold, rel=1e-9, abs=1e-12)
