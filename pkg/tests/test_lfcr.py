import numpy as np
import pytest

from saddlecr.core import Point, grad_norm
from saddlecr.lfcr import (
    C_MAX,
    C_MIN,
    LfcrConfig,
    backtrack_cubic_step,
    extragradient_update,
    run_lfcr,
)
from saddlecr.problems import (
    BilinearToyProblem,
    ScalarToyProblem,
    initial_point,
    make_cubic_bilinear,
)


def test_config_validation():
    with pytest.raises(ValueError):
        LfcrConfig(c=0.5)
    with pytest.raises(ValueError):
        LfcrConfig(c=C_MIN / 2)
    with pytest.raises(ValueError):
        LfcrConfig(H0=0.0)
    LfcrConfig(c=C_MIN)
    LfcrConfig(c=C_MAX)


def test_first_iteration_hand_numbers():
    """Full hand-checked chain on the scalar toy from the origin, H0 = 1."""
    p = ScalarToyProblem()
    z_hat = np.zeros(2)

    H, step, doublings, _ = backtrack_cubic_step(p, z_hat, 1.0, cap=60)
    # acceptance at H = 1: LHS 0.023518 <= (H/2) ||d||^2 = 0.076678
    assert H == 1.0
    assert doublings == 0
    assert step.theta == pytest.approx(2.349638, abs=1e-6)
    np.testing.assert_allclose(step.z_new, [0.153355, -0.360330], atol=1e-6)
    assert step.step_norm == pytest.approx(0.391606, abs=1e-6)

    F_next = p.operator(step.z_new)
    np.testing.assert_allclose(F_next, [-0.336812, 0.846645], atol=1e-6)

    lam = C_MAX / (H * step.step_norm)
    assert lam == pytest.approx((1.0 / 13.0) / (step.theta / 6.0), rel=1e-12)
    assert lam == pytest.approx(0.196430, abs=1e-6)

    z_hat2 = extragradient_update(z_hat, F_next, lam)
    np.testing.assert_allclose(z_hat2, [0.066160, -0.166306], atol=1e-6)


def test_backtracking_doubles_until_accepted():
    p = make_cubic_bilinear(10, rho=40.0, b_seed=0)
    z0 = initial_point(p, seed=0)
    H, step, doublings, _ = backtrack_cubic_step(p, z0.data, 1.0, cap=60)
    assert H >= 1.0
    assert H == 2.0 ** doublings
    d = step.z_new - z0.data
    lhs = np.linalg.norm(
        p.operator(step.z_new) - p.operator(z0.data) - p.jacobian(z0.data) @ d
    )
    assert lhs <= 0.5 * H * np.linalg.norm(d) ** 2 + 1e-12


def test_accepted_h_bounded_by_twice_rho():
    p = make_cubic_bilinear(10, rho=40.0, b_seed=0)
    z0 = initial_point(p, seed=0)
    out = run_lfcr(p, z0, LfcrConfig(max_iters=50))
    assert out.H_final <= 2.0 * p.rho


def test_converges_on_benchmark_instance():
    p = make_cubic_bilinear(20, rho=10.0, b_seed=1)
    z0 = initial_point(p, seed=1)
    out = run_lfcr(p, z0, LfcrConfig(max_iters=500, grad_tol=1e-7))
    assert out.converged
    assert grad_norm(p, out.z_bar) <= 1e-7
    zs = p.known_saddle()
    assert np.linalg.norm(out.z_bar.data - zs.data) < 1e-4


def test_exact_return_when_started_at_saddle():
    p = make_cubic_bilinear(6, rho=5.0, b_seed=2)
    zs = p.known_saddle()
    out = run_lfcr(p, zs, LfcrConfig(max_iters=10))
    assert out.exact
    np.testing.assert_allclose(out.z_bar.data, zs.data, atol=1e-12)


def test_bilinear_one_newton_step():
    """Constant Jacobian: the look-ahead point solves the problem exactly."""
    A = np.array([[2.0, 0.0], [1.0, 1.0]])
    p = BilinearToyProblem(A)
    z0 = Point(np.array([1.0, -1.0, 0.5, 0.5]), p.dims)
    out = run_lfcr(p, z0, LfcrConfig(max_iters=400, grad_tol=1e-8))
    assert out.converged
    assert np.linalg.norm(out.z_bar.data) < 1e-7


def test_budget_and_stop_hooks():
    p = make_cubic_bilinear(10, rho=10.0, b_seed=3)
    z0 = initial_point(p, seed=3)
    out = run_lfcr(p, z0, LfcrConfig(max_iters=1000), budget=lambda H: 7)
    assert out.iterations <= 7

    seen = []

    def stop(z_avg):
        seen.append(z_avg.copy())
        return len(seen) >= 4

    out = run_lfcr(p, z0, LfcrConfig(max_iters=1000), stop=stop)
    assert out.iterations == 4


def test_trace_and_counters():
    p = make_cubic_bilinear(8, rho=10.0, b_seed=4)
    z0 = initial_point(p, seed=4)
    out = run_lfcr(p, z0, LfcrConfig(max_iters=25))
    assert len(out.trace) == out.iterations
    ks = [r.k for r in out.trace]
    assert ks == list(range(1, out.iterations + 1))
    assert out.operator_evals > 0
    assert out.jacobian_evals == out.trace[-1].jacobian_evals
    # H is nondecreasing along the run
    hs = [r.H for r in out.trace]
    assert all(h2 >= h1 for h1, h2 in zip(hs, hs[1:]))
    # lambda rule lam * H * ||step|| = c
    for r in out.trace:
        assert r.lam * r.H * r.step_norm == pytest.approx(C_MAX, rel=1e-12)


def test_on_accept_hook_sees_every_iteration():
    p = make_cubic_bilinear(8, rho=10.0, b_seed=4)
    z0 = initial_point(p, seed=4)
    calls = []

    def on_accept(z_hat, z_next, H, lam, step_norm):
        calls.append((z_hat.copy(), z_next.copy(), H, lam, step_norm))

    out = run_lfcr(p, z0, LfcrConfig(max_iters=25), on_accept=on_accept)
    assert len(calls) == out.iterations
    for z_hat, z_next, H, lam, step_norm in calls:
        d = z_next - z_hat
        lhs = np.linalg.norm(
            p.operator(z_next) - p.operator(z_hat) - p.jacobian(z_hat) @ d
        )
        assert lhs <= 0.5 * H * np.linalg.norm(d) ** 2 + 1e-12
        assert lam * H * step_norm == pytest.approx(1.0 / 13.0, rel=1e-12)
