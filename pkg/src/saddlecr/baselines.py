"""Comparison baselines: extragradient and fixed-constant cubic Newton.

The extragradient method is the classical two-call scheme (look-ahead
operator evaluation, then a corrected step from the anchor).  The
fixed-constant method runs the same cubic-step/extragradient loop as
the adaptive solver but with the curvature pinned at a known Hessian
Lipschitz constant and no acceptance test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CountingOracle, Point, ProblemOracle
from .cubic import solve_cubic_step
from .lfcr import C_MAX, C_MIN


@dataclass
class EgConfig:
    eta: float
    max_iters: int = 10_000
    grad_tol: float = 0.0

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")


@dataclass
class NewtonMinMaxConfig:
    rho: float
    c: float = C_MAX
    max_iters: int = 1000
    grad_tol: float = 0.0

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if not (C_MIN <= self.c <= C_MAX):
            raise ValueError(f"c must lie in [1/33, 1/13], got {self.c}")


@dataclass
class BaselineTraceRow:
    k: int
    grad_norm: float
    step_norm: float
    lam: float
    operator_evals: int
    jacobian_evals: int
    linear_solves: int


@dataclass
class BaselineOutput:
    z_final: Point
    iterations: int
    converged: bool
    trace: list[BaselineTraceRow] = field(default_factory=list)
    operator_evals: int = 0
    jacobian_evals: int = 0
    linear_solves: int = 0


def run_eg(oracle: ProblemOracle, z0: Point, config: EgConfig) -> BaselineOutput:
    """Extragradient iteration z+ = z - eta F(z - eta F(z))."""
    if z0.dims != oracle.dims:
        raise ValueError("initial point dims do not match oracle")
    count = CountingOracle(oracle)
    eta = config.eta
    z = np.array(z0.data, dtype=float, copy=True)
    trace: list[BaselineTraceRow] = []
    converged = False
    k = 0
    for k in range(1, config.max_iters + 1):
        Fz = count.operator(z)
        gnorm = float(np.linalg.norm(Fz))
        if config.grad_tol > 0.0 and gnorm <= config.grad_tol:
            converged = True
            k -= 1
            break
        z_half = z - eta * Fz
        Fh = count.operator(z_half)
        z_new = z - eta * Fh
        if not np.isfinite(z_new).all():
            raise FloatingPointError(f"non-finite iterate at iteration {k}")
        step = float(np.linalg.norm(z_new - z))
        z = z_new
        trace.append(
            BaselineTraceRow(
                k=k,
                grad_norm=float(np.linalg.norm(count.operator(z))),
                step_norm=step,
                lam=eta,
                operator_evals=count.operator_evals,
                jacobian_evals=count.jacobian_evals,
                linear_solves=0,
            )
        )
        if config.grad_tol > 0.0 and trace[-1].grad_norm <= config.grad_tol:
            converged = True
            break
    return BaselineOutput(
        z_final=Point(z, z0.dims),
        iterations=k,
        converged=converged or config.grad_tol == 0.0,
        trace=trace,
        operator_evals=count.operator_evals,
        jacobian_evals=count.jacobian_evals,
        linear_solves=0,
    )


def run_newton_minmax(
    oracle: ProblemOracle, z0: Point, config: NewtonMinMaxConfig
) -> BaselineOutput:
    """Cubic-step extragradient loop with the curvature fixed at rho.

    Identical to the adaptive solver except that no backtracking or
    acceptance test runs; the step size is c / (rho ||step||) and the
    output is the step-size-weighted average of the accepted points.
    """
    if z0.dims != oracle.dims:
        raise ValueError("initial point dims do not match oracle")
    count = CountingOracle(oracle)
    rho = config.rho
    z_hat = np.array(z0.data, dtype=float, copy=True)
    wsum = 0.0
    wz = np.zeros(z0.dims.total)
    trace: list[BaselineTraceRow] = []
    solves = 0
    theta_hint = None
    converged = False
    k = 0
    for k in range(1, config.max_iters + 1):
        g = count.operator(z_hat)
        J = count.jacobian(z_hat)
        step = solve_cubic_step(z_hat, g, J, rho, theta_hint=theta_hint)
        solves += step.newton_iters
        theta_hint = step.theta
        if step.step_norm == 0.0:
            converged = True
            z_bar = z_hat if wsum == 0.0 else wz / wsum
            break
        F_next = count.operator(step.z_new)
        if float(np.linalg.norm(F_next)) == 0.0:
            converged = True
            z_bar = step.z_new
            wsum = 1.0
            wz = step.z_new.copy()
            break
        lam = config.c / (rho * step.step_norm)
        wsum += lam
        wz += lam * step.z_new
        z_hat = z_hat - lam * F_next
        z_bar = wz / wsum
        gbar = float(np.linalg.norm(count.operator(z_bar)))
        trace.append(
            BaselineTraceRow(
                k=k,
                grad_norm=gbar,
                step_norm=step.step_norm,
                lam=lam,
                operator_evals=count.operator_evals,
                jacobian_evals=count.jacobian_evals,
                linear_solves=solves,
            )
        )
        if config.grad_tol > 0.0 and gbar <= config.grad_tol:
            converged = True
            break
    else:
        z_bar = z_hat if wsum == 0.0 else wz / wsum
    return BaselineOutput(
        z_final=Point(z_bar, z0.dims),
        iterations=k,
        converged=converged or config.grad_tol == 0.0,
        trace=trace,
        operator_evals=count.operator_evals,
        jacobian_evals=count.jacobian_evals,
        linear_solves=solves,
    )
