"""Lipschitz-free cubic regularization for convex-concave saddle problems.

Each iteration backtracks on a local curvature estimate H (doubling it
until the cubic step's linearization error is within H/2 times the
squared step), then takes an extragradient step against the operator at
the accepted point and accumulates a step-size-weighted average of the
accepted points.  The method needs no knowledge of the true Hessian
Lipschitz constant: H only ever grows, and never beyond twice the true
constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import CountingOracle, Point, ProblemOracle, Vector
from .cubic import CubicStepResult, solve_cubic_step

C_MIN = 1.0 / 33.0
C_MAX = 1.0 / 13.0


class BacktrackingError(RuntimeError):
    """Curvature backtracking exhausted its doubling cap."""


class DegenerateStepError(RuntimeError):
    """Cubic step collapsed to zero length with a nonzero operator."""


@dataclass
class LfcrConfig:
    c: float = C_MAX
    H0: float = 1.0
    max_iters: int = 1000
    grad_tol: float = 0.0
    backtrack_cap: int = 60

    def __post_init__(self) -> None:
        if not (C_MIN <= self.c <= C_MAX):
            raise ValueError(f"c must lie in [1/33, 1/13], got {self.c}")
        if self.H0 <= 0:
            raise ValueError(f"H0 must be > 0, got {self.H0}")
        if self.grad_tol < 0:
            raise ValueError(f"grad_tol must be >= 0, got {self.grad_tol}")


@dataclass
class LfcrTraceRow:
    k: int
    H: float
    step_norm: float
    lam: float
    grad_norm_avg: float
    backtracks: int
    operator_evals: int
    jacobian_evals: int
    linear_solves: int


@dataclass
class LfcrOutput:
    z_bar: Point
    H_final: float
    iterations: int
    converged: bool
    exact: bool
    trace: list[LfcrTraceRow] = field(default_factory=list)
    operator_evals: int = 0
    jacobian_evals: int = 0
    linear_solves: int = 0


def backtrack_cubic_step(
    oracle: ProblemOracle,
    z_hat: Vector,
    H_start: float,
    cap: int,
    theta_hint: float | None = None,
) -> tuple[float, CubicStepResult, int, int]:
    """Find the smallest doubling of H whose cubic step is acceptable.

    Returns ``(H_accepted, step, doublings, linear_solves)``.  The
    acceptance test bounds the operator's linearization error at the
    trial point by ``H/2`` times the squared step length; doubling H
    shrinks the step, so acceptance is guaranteed once H reaches the
    local Hessian-Lipschitz scale.
    """
    if H_start <= 0:
        raise ValueError(f"H_start must be > 0, got {H_start}")
    g = oracle.operator(z_hat)
    J = oracle.jacobian(z_hat)
    gnorm = np.linalg.norm(g)
    H = H_start
    solves = 0
    for doublings in range(cap + 1):
        step = solve_cubic_step(z_hat, g, J, H, theta_hint=theta_hint)
        solves += step.newton_iters
        if step.step_norm == 0.0:
            if gnorm <= 1e-13 * (1.0 + np.linalg.norm(J, "fro")):
                return H, step, doublings, solves
            raise DegenerateStepError(
                f"zero-length step with operator norm {gnorm:.3e}"
            )
        delta = step.z_new - z_hat
        err = np.linalg.norm(oracle.operator(step.z_new) - g - J @ delta)
        # Below the rounding noise of the left-hand side the inequality
        # carries no curvature information; without the allowance H would
        # double forever once the iterates reach machine precision.
        noise = 16.0 * np.finfo(float).eps * (
            1.0 + np.linalg.norm(J, "fro") * (1.0 + np.linalg.norm(z_hat))
        )
        if err <= 0.5 * H * step.step_norm**2 + noise:
            return H, step, doublings, solves
        H *= 2.0
        theta_hint = step.theta * 2.0  # theta grows roughly with H
    raise BacktrackingError(
        f"no acceptable curvature after {cap} doublings from H={H_start:.3e}"
    )


def extragradient_update(z_hat: Vector, F_znext: Vector, lam: float) -> Vector:
    """Move the anchor against the operator at the look-ahead point."""
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    return z_hat - lam * F_znext


@dataclass
class LfcrState:
    """Mutable accumulator for the weighted average and trace."""

    k: int = 0
    H: float = 0.0
    weight_sum: float = 0.0
    weighted_point_sum: Vector | None = None
    trace: list[LfcrTraceRow] = field(default_factory=list)


def weighted_average(state: LfcrState) -> Vector:
    if state.weight_sum <= 0:
        raise ValueError("weighted average requested before any iterate")
    return state.weighted_point_sum / state.weight_sum


def run_lfcr(
    oracle: ProblemOracle,
    z0: Point,
    config: LfcrConfig,
    *,
    budget: Callable[[float], int] | None = None,
    stop: Callable[[Vector], bool] | None = None,
    on_accept: Callable[[Vector, Vector, float, float, float], None] | None = None,
    record_trace: bool = True,
) -> LfcrOutput:
    """Run the full algorithm from ``z0``.

    ``budget`` optionally replaces ``max_iters`` with a target iteration
    count that may depend on the current curvature estimate (it must be
    nondecreasing in H so the loop terminates).  ``stop`` is an extra
    per-iteration stopping test on the averaged iterate.  ``on_accept``
    is called with ``(z_hat, z_next, H, lam)`` after each accepted step.
    """
    if z0.dims != oracle.dims:
        raise ValueError("initial point dims do not match oracle")
    count = CountingOracle(oracle)
    z_hat = np.array(z0.data, dtype=float, copy=True)
    H = config.H0
    state = LfcrState(H=H, weighted_point_sum=np.zeros(z0.dims.total))
    theta_hint = None
    solves = 0
    need_avg_grad = record_trace or config.grad_tol > 0.0

    def make_output(z_out: Vector, converged: bool, exact: bool) -> LfcrOutput:
        return LfcrOutput(
            z_bar=Point(z_out, z0.dims),
            H_final=H,
            iterations=state.k,
            converged=converged,
            exact=exact,
            trace=state.trace,
            operator_evals=count.operator_evals,
            jacobian_evals=count.jacobian_evals,
            linear_solves=solves,
        )

    while True:
        state.k += 1
        try:
            H, step, backtracks, step_solves = backtrack_cubic_step(
                count, z_hat, H, config.backtrack_cap, theta_hint
            )
        except DegenerateStepError:
            # Operator at the anchor is numerically zero: exact solution.
            return make_output(z_hat, True, True)
        solves += step_solves
        state.H = H
        theta_hint = step.theta
        z_next = step.z_new

        if step.step_norm == 0.0:
            # Backtracking certified a stationary anchor.
            return make_output(z_hat, True, True)

        F_next = count.operator(z_next)
        fnorm = float(np.linalg.norm(F_next))
        if fnorm == 0.0:
            return make_output(z_next, True, True)

        lam = config.c / (H * step.step_norm)
        if on_accept is not None:
            on_accept(z_hat, z_next, H, lam, step.step_norm)
        state.weight_sum += lam
        state.weighted_point_sum += lam * z_next
        z_hat = extragradient_update(z_hat, F_next, lam)

        z_bar = weighted_average(state)
        if need_avg_grad or stop is not None:
            gbar = float(np.linalg.norm(count.operator(z_bar)))
        else:
            gbar = np.nan
        if not np.isfinite(z_bar).all() or not np.isfinite(H):
            raise FloatingPointError(
                f"non-finite iterate at iteration {state.k}"
            )
        if record_trace:
            state.trace.append(
                LfcrTraceRow(
                    k=state.k,
                    H=H,
                    step_norm=step.step_norm,
                    lam=lam,
                    grad_norm_avg=gbar,
                    backtracks=backtracks,
                    operator_evals=count.operator_evals,
                    jacobian_evals=count.jacobian_evals,
                    linear_solves=solves,
                )
            )

        if config.grad_tol > 0.0 and gbar <= config.grad_tol:
            return make_output(z_bar, True, False)
        if stop is not None and stop(z_bar):
            return make_output(z_bar, True, False)
        limit = budget(H) if budget is not None else config.max_iters
        if state.k >= limit:
            return make_output(z_bar, config.grad_tol == 0.0, False)
