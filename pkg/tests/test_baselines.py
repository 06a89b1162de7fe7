import numpy as np
import pytest

from saddlecr.baselines import (
    EgConfig,
    NewtonMinMaxConfig,
    run_eg,
    run_newton_minmax,
)
from saddlecr.core import Point, grad_norm
from saddlecr.lfcr import LfcrConfig, run_lfcr
from saddlecr.problems import (
    BilinearToyProblem,
    initial_point,
    make_cubic_bilinear,
)


def test_eg_single_step_hand_numbers():
    """f = x y from (1, 0): F(z) = (y, -x); two-call update by hand."""
    p = BilinearToyProblem(np.array([[1.0]]))
    z0 = Point(np.array([1.0, 0.0]), p.dims)
    eta = 0.1
    out = run_eg(p, z0, EgConfig(eta=eta, max_iters=1))
    # half step: (1, 0) - 0.1 (0, -1) = (1, 0.1)
    # full step: (1, 0) - 0.1 F(1, 0.1) = (1 - 0.01, 0.1)
    np.testing.assert_allclose(out.z_final.data, [0.99, 0.1], atol=1e-15)


def test_eg_contracts_on_bilinear():
    p = BilinearToyProblem(np.array([[1.0]]))
    z0 = Point(np.array([1.0, 0.0]), p.dims)
    out = run_eg(p, z0, EgConfig(eta=0.1, max_iters=6000, grad_tol=1e-8))
    assert out.converged
    assert np.linalg.norm(out.z_final.data) < 1e-8


def test_eg_small_eta_taylor():
    """One EG step agrees with z - eta F(z) to O(eta^2)."""
    p = make_cubic_bilinear(6, rho=5.0, b_seed=0)
    z0 = initial_point(p, seed=0)
    for eta in (1e-3, 1e-4, 1e-5):
        out = run_eg(p, z0, EgConfig(eta=eta, max_iters=1))
        euler = z0.data - eta * p.operator(z0.data)
        err = np.linalg.norm(out.z_final.data - euler)
        assert err <= 10.0 * eta ** 2


def test_eg_counts_and_trace():
    p = make_cubic_bilinear(6, rho=5.0, b_seed=0)
    z0 = initial_point(p, seed=0)
    out = run_eg(p, z0, EgConfig(eta=0.01, max_iters=30))
    assert out.iterations == 30
    assert len(out.trace) == 30
    assert out.jacobian_evals == 0
    assert out.linear_solves == 0
    gs = [r.grad_norm for r in out.trace]
    assert gs[0] >= gs[-1]


def test_newton_minmax_matches_lfcr_when_h_equals_rho():
    """With H0 already at the accepted level, the two runs take the same path."""
    p = make_cubic_bilinear(8, rho=10.0, b_seed=2)
    z0 = initial_point(p, seed=2)
    lf = run_lfcr(p, z0, LfcrConfig(H0=16.0, max_iters=30))
    assert lf.H_final == 16.0  # no doubling happened
    nm = run_newton_minmax(p, z0, NewtonMinMaxConfig(rho=16.0, max_iters=30))
    np.testing.assert_allclose(nm.z_final.data, lf.z_bar.data, atol=1e-10)


def test_newton_minmax_converges():
    p = make_cubic_bilinear(20, rho=10.0, b_seed=1)
    z0 = initial_point(p, seed=1)
    out = run_newton_minmax(
        p, z0, NewtonMinMaxConfig(rho=10.0, max_iters=500, grad_tol=1e-7)
    )
    assert out.converged
    assert grad_norm(p, out.z_final) <= 1e-7


def test_config_validation():
    with pytest.raises(ValueError):
        EgConfig(eta=0.0)
    with pytest.raises(ValueError):
        NewtonMinMaxConfig(rho=-1.0)
    with pytest.raises(ValueError):
        NewtonMinMaxConfig(rho=1.0, c=0.2)
