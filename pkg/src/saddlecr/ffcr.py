"""Fully parameter-free cubic regularization.

Wraps the Lipschitz-free solver in a guess-and-check loop over an
estimate D of the initial distance to the saddle point.  For a fixed
guess, a stage solves a sequence of strongly regularized subproblems
whose proximal weight sigma grows geometrically while the proximal
center tracks a convex combination of past stage iterates; a separate
curvature backtracking on the regularized operator maintains the
estimate M that controls the stage length.  If the distance guess was
large enough the stage provably drives the gradient below the target;
otherwise D is quadrupled and the stage repeats from the original
starting point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    CountingOracle,
    Point,
    ProblemOracle,
    RegularizedOracle,
    Vector,
    regularize,
)
from .cubic import CubicStepResult, solve_cubic_step
from .lfcr import C_MAX, C_MIN, BacktrackingError, DegenerateStepError, LfcrConfig, run_lfcr

_BUDGET_CONST = 33.0 * math.sqrt(3.0)


class StageFailure(RuntimeError):
    """Outer loop exhausted its stage cap without meeting the target.

    Carries the best partial result on the ``output`` attribute.
    """

    def __init__(self, message: str, output: "FfcrOutput | None" = None):
        super().__init__(message)
        self.output = output


@dataclass
class FfcrConfig:
    epsilon: float
    M0: float = 1.0
    D0: float = 1.0
    c: float = C_MAX
    max_outer: int = 25
    backtrack_cap: int = 60
    # Literal reading of the stage reset: every stage restarts its H and M
    # estimates from M0.  Warm-starting threads the previous stage's M
    # forward instead.
    warm_start_m: bool = False

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.M0 <= 0 or self.D0 <= 0:
            raise ValueError("M0 and D0 must be > 0")
        if not (C_MIN <= self.c <= C_MAX):
            raise ValueError(f"c must lie in [1/33, 1/13], got {self.c}")


@dataclass
class StageTraceRow:
    t: int
    D: float
    k: int
    sigma: float
    gamma: float
    inner_iterations: int
    H: float
    M: float
    m_backtracks: int
    grad_norm: float
    operator_evals: int
    jacobian_evals: int
    linear_solves: int
    inner_trace: list = field(default_factory=list)


@dataclass
class FfcrOutput:
    z_final: Point
    grad_norm_final: float
    D_final: float
    M_final: float
    stages: int
    total_inner_iterations: int
    converged: bool
    attempted_D: list[float] = field(default_factory=list)
    trace: list[StageTraceRow] = field(default_factory=list)
    operator_evals: int = 0
    jacobian_evals: int = 0
    linear_solves: int = 0


def sigma_schedule(eps: float, D_t: float, k: int) -> float:
    """Regularization weight for inner step k: (eps / (41 D)) 4^k, 0 at k=0."""
    if eps <= 0 or D_t <= 0:
        raise ValueError("eps and D_t must be > 0")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return 0.0
    return eps / (41.0 * D_t) * 4.0**k


def gamma_and_center(
    sigma_prev: float, sigma_k: float, center_prev: Vector, z_prev: Vector
) -> tuple[float, Vector]:
    """Mixing weight and new proximal center for one inner step."""
    if not sigma_k > sigma_prev >= 0:
        raise ValueError(
            f"need sigma_k > sigma_prev >= 0, got {sigma_k}, {sigma_prev}"
        )
    gamma = 1.0 - sigma_prev / sigma_k
    return gamma, (1.0 - gamma) * center_prev + gamma * z_prev


def inner_iteration_budget(H_est: float, D_t: float, sigma_k: float, k: int) -> int:
    """Iteration count for the inner solver at step k."""
    if H_est <= 0 or D_t <= 0 or sigma_k <= 0 or k < 1:
        raise ValueError("all budget inputs must be positive")
    base = _BUDGET_CONST * 8.0 ** (3 - k) * H_est * D_t / sigma_k
    return max(1, math.ceil(base ** (2.0 / 3.0)))


def stage_limit(M_current: float, D_t: float, DF0_norm: float, eps: float) -> int:
    """Number of inner steps after which a stage may terminate.

    Arguments of the logarithms are clamped below at 1, so inactive
    terms contribute 0 instead of a negative count.
    """
    if M_current <= 0 or D_t <= 0 or eps <= 0 or DF0_norm < 0:
        raise ValueError("stage limit inputs out of range")
    terms = (
        math.log(max(32.0 * M_current * D_t**2 / eps, 1.0), 64.0),
        math.log(max(8.0 * M_current * D_t**2 / eps, 1.0), 8.0),
        math.log(max(4.0 * math.sqrt(12.0 / 11.0) * DF0_norm * D_t / eps, 1.0), 8.0),
    )
    return max(1, math.ceil(max(terms)))


def spectral_norm_diff(J_a: np.ndarray, J_b: np.ndarray) -> float:
    """Largest singular value of J_a - J_b (exact dense SVD)."""
    if J_a.shape != J_b.shape:
        raise ValueError(f"shape mismatch: {J_a.shape} vs {J_b.shape}")
    diff = J_a - J_b
    if not diff.any():
        return 0.0
    return float(np.linalg.norm(diff, 2))


def backtrack_m(
    oracle_reg: RegularizedOracle,
    z_k: Vector,
    M_start: float,
    cap: int,
) -> tuple[float, CubicStepResult, int, int]:
    """Verify and grow the curvature estimate M at the stage iterate.

    ``M_start`` must already include the spectral-norm seed term.  The
    accepted M certifies the cubic step of the regularized operator at
    z_k; the trial point itself is only needed for that certificate.
    Returns ``(M_accepted, step, doublings, linear_solves)``.
    """
    if M_start <= 0:
        raise ValueError(f"M_start must be > 0, got {M_start}")
    g = oracle_reg.operator(z_k)
    J = oracle_reg.jacobian(z_k)
    gnorm = np.linalg.norm(g)
    M = M_start
    solves = 0
    for doublings in range(cap + 1):
        step = solve_cubic_step(z_k, g, J, M)
        solves += step.newton_iters
        if step.step_norm == 0.0:
            if gnorm <= 1e-13 * (1.0 + np.linalg.norm(J, "fro")):
                return M, step, doublings, solves
            raise DegenerateStepError(
                f"zero-length step with operator norm {gnorm:.3e}"
            )
        delta = step.z_new - z_k
        err = np.linalg.norm(oracle_reg.operator(step.z_new) - g - J @ delta)
        # Same rounding-noise allowance as the H backtracking: below it the
        # inequality cannot distinguish curvature from float cancellation.
        noise = 16.0 * np.finfo(float).eps * (
            1.0 + np.linalg.norm(J, "fro") * (1.0 + np.linalg.norm(z_k))
        )
        if err <= 0.5 * M * step.step_norm**2 + noise:
            return M, step, doublings, solves
        M *= 2.0
    raise BacktrackingError(
        f"no acceptable M after {cap} doublings from M={M_start:.3e}"
    )


def run_stage(
    oracle: ProblemOracle,
    z0: Point,
    D_t: float,
    config: FfcrConfig,
    t: int = 0,
    M_start: float | None = None,
    *,
    inner_stop: Callable[[Vector], bool] | None = None,
    on_accept_h: Callable[
        [RegularizedOracle, Vector, Vector, float, float, float], None
    ] | None = None,
    on_accept_m: Callable[[RegularizedOracle, Vector, Vector, float], None] | None = None,
    record_inner: bool = False,
) -> tuple[Point, float, float, list[StageTraceRow], int, bool]:
    """Solve the accumulative regularized subproblem for one distance guess.

    Returns ``(z_stage, M_stage, H_stage, rows, inner_iters, aborted)``;
    ``aborted`` is set when ``inner_stop`` cut the stage short.
    """
    if D_t <= 0:
        raise ValueError(f"D_t must be > 0, got {D_t}")
    count = CountingOracle(oracle)
    eps = config.epsilon
    z0_vec = np.array(z0.data, dtype=float, copy=True)
    center = z0_vec.copy()
    z_prev = z0_vec.copy()
    J0 = count.jacobian(z0_vec)
    df0_norm = float(np.linalg.norm(J0, 2))

    M = config.M0 if M_start is None else M_start
    H = M
    sigma_prev = 0.0
    rows: list[StageTraceRow] = []
    total_inner = 0
    solves = 0
    k = 0
    aborted = False

    while True:
        k += 1
        sigma_k = sigma_schedule(eps, D_t, k)
        gamma, center = gamma_and_center(sigma_prev, sigma_k, center, z_prev)
        reg = regularize(count, sigma_k, Point(center, z0.dims))

        inner_cfg = LfcrConfig(
            c=config.c, H0=H, max_iters=1, grad_tol=0.0,
            backtrack_cap=config.backtrack_cap,
        )
        budget = lambda h, _k=k: inner_iteration_budget(h, D_t, sigma_k, _k)
        if on_accept_h is not None:
            hook = lambda zh, zn, h, lam, sn, _reg=reg: on_accept_h(_reg, zh, zn, h, lam, sn)
        else:
            hook = None
        inner = run_lfcr(
            reg,
            Point(z_prev, z0.dims),
            inner_cfg,
            budget=budget,
            stop=inner_stop,
            on_accept=hook,
            record_trace=record_inner,
        )
        z_k = inner.z_bar.data
        H = inner.H_final
        total_inner += inner.iterations
        solves += inner.linear_solves

        # Seed M from the observed curvature variation since the stage start,
        # skipping the ratio when the iterate has not moved.
        dist0 = float(np.linalg.norm(z_k - z0_vec))
        seed = M
        if dist0 > 0.0:
            seed = max(
                seed,
                spectral_norm_diff(count.jacobian(z_k), J0) / dist0,
            )
        M, m_step, m_backtracks, m_solves = backtrack_m(
            reg, z_k, seed, config.backtrack_cap
        )
        solves += m_solves
        if on_accept_m is not None:
            on_accept_m(reg, z_k, m_step.z_new, M)

        gnorm = float(np.linalg.norm(count.operator(z_k)))
        rows.append(
            StageTraceRow(
                t=t,
                D=D_t,
                k=k,
                sigma=sigma_k,
                gamma=gamma,
                inner_iterations=inner.iterations,
                H=H,
                M=M,
                m_backtracks=m_backtracks,
                grad_norm=gnorm,
                operator_evals=count.operator_evals,
                jacobian_evals=count.jacobian_evals,
                linear_solves=solves,
                inner_trace=inner.trace,
            )
        )

        z_prev = z_k
        sigma_prev = sigma_k
        if inner_stop is not None and inner_stop(z_k):
            aborted = True
            break
        if k >= stage_limit(M, D_t, df0_norm, eps):
            break

    return Point(z_prev, z0.dims), M, H, rows, total_inner, aborted


def run_ffcr(
    oracle: ProblemOracle,
    z0: Point,
    config: FfcrConfig,
    *,
    bench_stop: float | Callable[[Vector], bool] | None = None,
    on_accept_h: Callable[
        [RegularizedOracle, Vector, Vector, float, float, float], None
    ] | None = None,
    on_accept_m: Callable[[RegularizedOracle, Vector, Vector, float], None] | None = None,
    record_inner: bool = False,
) -> FfcrOutput:
    """Run the guess-and-check outer loop until the gradient target is met.

    ``bench_stop`` is a harness facility: a gradient-norm threshold (or
    an arbitrary predicate on the iterate) that cuts the run short as
    soon as any recorded iterate satisfies it, instead of waiting for
    the scheduled stage budgets.  It never alters the iterates
    themselves, only where the run stops.
    """
    if z0.dims != oracle.dims:
        raise ValueError("initial point dims do not match oracle")
    count = CountingOracle(oracle)
    eps = config.epsilon

    if bench_stop is None:
        inner_stop = None
    elif callable(bench_stop):
        inner_stop = bench_stop
    else:
        threshold = float(bench_stop)

        def inner_stop(z: Vector) -> bool:
            return float(np.linalg.norm(count.operator(z))) <= threshold

    attempted: list[float] = []
    all_rows: list[StageTraceRow] = []
    total_inner = 0
    total_solves = 0
    M_carry: float | None = None
    best: tuple[float, Point] | None = None

    for t in range(config.max_outer):
        D_t = config.D0 * 4.0**t
        attempted.append(D_t)
        z_stage, M_stage, _H, rows, inner_iters, aborted = run_stage(
            count,
            z0,
            D_t,
            config,
            t=t,
            M_start=M_carry if config.warm_start_m else None,
            inner_stop=inner_stop,
            on_accept_h=on_accept_h,
            on_accept_m=on_accept_m,
            record_inner=record_inner,
        )
        all_rows.extend(rows)
        total_inner += inner_iters
        total_solves += rows[-1].linear_solves if rows else 0
        M_carry = M_stage

        gfinal = float(np.linalg.norm(count.operator(z_stage.data)))
        if best is None or gfinal < best[0]:
            best = (gfinal, z_stage)
        if gfinal <= eps or aborted:
            return FfcrOutput(
                z_final=z_stage,
                grad_norm_final=gfinal,
                D_final=D_t,
                M_final=M_stage,
                stages=t + 1,
                total_inner_iterations=total_inner,
                converged=gfinal <= eps or (aborted and bench_stop is not None),
                attempted_D=attempted,
                trace=all_rows,
                operator_evals=count.operator_evals,
                jacobian_evals=count.jacobian_evals,
                linear_solves=total_solves,
            )

    grad_best, z_best = best
    raise StageFailure(
        f"gradient target {eps:.3e} not met after {config.max_outer} stages; "
        f"best gradient norm {grad_best:.3e}",
        output=FfcrOutput(
            z_final=z_best,
            grad_norm_final=grad_best,
            D_final=attempted[-1],
            M_final=M_carry if M_carry is not None else config.M0,
            stages=config.max_outer,
            total_inner_iterations=total_inner,
            converged=False,
            attempted_D=attempted,
            trace=all_rows,
            operator_evals=count.operator_evals,
            jacobian_evals=count.jacobian_evals,
            linear_solves=total_solves,
        ),
    )
