"""Parameter-free cubic-regularized methods for convex-concave saddle points."""

from .core import (
    CountingOracle,
    Point,
    ProblemDims,
    ProblemOracle,
    RegularizedOracle,
    finite_difference_check,
    grad_norm,
    jacobian_df,
    operator_f,
    regularize,
)
from .cubic import (
    CubicStepResult,
    SecularSolveError,
    secular_phi,
    solve_cubic_step,
    solve_theta,
    step_residual,
)
from .lfcr import (
    BacktrackingError,
    DegenerateStepError,
    LfcrConfig,
    LfcrOutput,
    backtrack_cubic_step,
    run_lfcr,
)
from .ffcr import (
    FfcrConfig,
    FfcrOutput,
    StageFailure,
    inner_iteration_budget,
    run_ffcr,
    sigma_schedule,
    stage_limit,
)
from .baselines import (
    BaselineOutput,
    EgConfig,
    NewtonMinMaxConfig,
    run_eg,
    run_newton_minmax,
)
from .problems import (
    BilinearToyProblem,
    CubicBilinearProblem,
    ScalarToyProblem,
    initial_point,
    load_instance,
    make_cubic_bilinear,
    restricted_gap,
    save_instance,
)

__all__ = [
    "BacktrackingError",
    "BaselineOutput",
    "BilinearToyProblem",
    "CountingOracle",
    "CubicBilinearProblem",
    "CubicStepResult",
    "DegenerateStepError",
    "EgConfig",
    "FfcrConfig",
    "FfcrOutput",
    "LfcrConfig",
    "LfcrOutput",
    "NewtonMinMaxConfig",
    "Point",
    "ProblemDims",
    "ProblemOracle",
    "RegularizedOracle",
    "ScalarToyProblem",
    "SecularSolveError",
    "StageFailure",
    "backtrack_cubic_step",
    "finite_difference_check",
    "grad_norm",
    "initial_point",
    "inner_iteration_budget",
    "jacobian_df",
    "load_instance",
    "make_cubic_bilinear",
    "operator_f",
    "regularize",
    "restricted_gap",
    "run_eg",
    "run_ffcr",
    "run_lfcr",
    "run_newton_minmax",
    "save_instance",
    "secular_phi",
    "sigma_schedule",
    "solve_cubic_step",
    "solve_theta",
    "stage_limit",
    "step_residual",
]

__version__ = "0.1.0"
