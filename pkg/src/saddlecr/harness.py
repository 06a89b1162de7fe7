"""Benchmark harness: run configuration, trace CSV emission, comparisons.

A run is fully determined by its :class:`RunConfig`; everything emitted
to the trace CSV except the wall-clock column is bit-reproducible.
Floats are formatted with 17 significant digits so traces can be
compared across implementations.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field, fields as dc_fields
from typing import Sequence

import numpy as np

from . import baselines, ffcr, lfcr, problems
from .core import CountingOracle, Point, grad_norm

SCHEMA_TAG = "saddlecr.trace.v1"
FLOAT_FMT = "%.17g"

TRACE_COLUMNS = [
    "schema",
    "wall_ms",
    "algorithm",
    "outer_t",
    "inner_k",
    "sub_iter",
    "grad_norm",
    "h_or_m",
    "step_norm",
    "lambda",
    "operator_evals",
    "jacobian_evals",
    "linear_solves",
]

ALGORITHMS = ("lfcr", "ffcr", "eg", "newton_minmax")
PROBLEMS = ("cubic", "scalar", "bilinear")
GRANULARITIES = ("outer", "inner", "all")

DEFAULT_C = 1.0 / 13.0
COMPARE_THRESHOLDS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class AlgorithmFailure(RuntimeError):
    """A dispatched algorithm signalled failure."""


@dataclass
class RunConfig:
    algo: str = ""
    problem: str = "cubic"
    n: int = 50
    rho: float = 10.0
    seed: int = 0
    c: float = DEFAULT_C
    h0: float = 1.0
    m0: float = 1.0
    d0: float = 1.0
    eta: float | None = None
    rho_known: float | None = None
    eps: float = 1e-3
    grad_tol: float = 0.0
    max_iters: int = 1000
    max_outer: int = 25
    bench_stop: float | None = None
    out: str | None = None
    granularity: str = "outer"

    def validate(self) -> None:
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"algo must be one of {ALGORITHMS}, got {self.algo!r}")
        if self.problem not in PROBLEMS:
            raise ConfigError(
                f"problem must be one of {PROBLEMS}, got {self.problem!r}"
            )
        if self.granularity not in GRANULARITIES:
            raise ConfigError(
                f"granularity must be one of {GRANULARITIES}, got {self.granularity!r}"
            )
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.rho <= 0:
            raise ConfigError(f"rho must be > 0, got {self.rho}")
        if self.algo in ("lfcr", "ffcr", "newton_minmax") and not (
            lfcr.C_MIN <= self.c <= lfcr.C_MAX
        ):
            raise ConfigError(f"c must lie in [1/33, 1/13], got {self.c}")
        if self.algo == "eg" and self.eta is None:
            raise ConfigError("eg requires --eta")
        if self.eta is not None and self.eta <= 0:
            raise ConfigError(f"eta must be > 0, got {self.eta}")
        if self.algo == "newton_minmax" and self.rho_known is None:
            raise ConfigError("newton_minmax requires --rho-known")
        if self.rho_known is not None and self.rho_known <= 0:
            raise ConfigError(f"rho_known must be > 0, got {self.rho_known}")
        for name in ("h0", "m0", "d0", "eps"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.grad_tol < 0:
            raise ConfigError("grad_tol must be >= 0")
        if self.max_iters < 1 or self.max_outer < 1:
            raise ConfigError("iteration limits must be >= 1")


_FIELD_TYPES = {f.name: f.type for f in dc_fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name in ("algo", "problem", "granularity", "out"):
        return raw
    if name in ("n", "seed", "max_iters", "max_outer"):
        return int(raw)
    return float(raw)


def config_from_mapping(mapping: dict[str, str]) -> RunConfig:
    """Build a validated RunConfig from string key=value pairs."""
    cfg = RunConfig()
    for key, raw in mapping.items():
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            setattr(cfg, name, _coerce(name, raw))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    cfg.validate()
    return cfg


def parse_config(source: str | Sequence[str]) -> RunConfig:
    """Parse a config file path or a flat ``key=value`` token sequence.

    Config files are line-oriented UTF-8 ``key=value`` with ``#``
    comments; unknown keys are rejected with the offending line number.
    """
    if isinstance(source, str):
        mapping: dict[str, str] = {}
        with open(source, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{source}:{lineno}: expected key=value")
                key, value = line.split("=", 1)
                mapping[key.strip()] = value.strip()
        return config_from_mapping(mapping)
    mapping = {}
    for token in source:
        if "=" not in token:
            raise ConfigError(f"expected key=value token, got {token!r}")
        key, value = token.split("=", 1)
        mapping[key.strip()] = value.strip()
    return config_from_mapping(mapping)


def build_problem(config: RunConfig):
    if config.problem == "cubic":
        return problems.make_cubic_bilinear(config.n, config.rho, b_seed=config.seed)
    if config.problem == "scalar":
        return problems.ScalarToyProblem(rho=config.rho)
    return problems.BilinearToyProblem(np.eye(config.n))


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def _write_rows(path: str, rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _trace_rows(config: RunConfig, output, wall_ms: float) -> list[list]:
    algo = config.algo
    rows: list[list] = []

    def row(t, k, sub, grad, hm, step, lam, ops, jacs, solves):
        rows.append(
            [SCHEMA_TAG, wall_ms, algo, t, k, sub, grad, hm, step, lam, ops, jacs, solves]
        )

    if algo == "lfcr":
        for r in output.trace:
            row(0, 0, r.k, r.grad_norm_avg, r.H, r.step_norm, r.lam,
                r.operator_evals, r.jacobian_evals, r.linear_solves)
    elif algo in ("eg", "newton_minmax"):
        hm = config.rho_known if algo == "newton_minmax" else 0.0
        for r in output.trace:
            row(0, 0, r.k, r.grad_norm, hm, r.step_norm, r.lam,
                r.operator_evals, r.jacobian_evals, r.linear_solves)
    else:
        last_t = None
        for r in output.trace:
            if config.granularity == "all":
                for sub in r.inner_trace:
                    row(r.t, r.k, sub.k, sub.grad_norm_avg, sub.H, sub.step_norm,
                        sub.lam, sub.operator_evals, sub.jacobian_evals,
                        sub.linear_solves)
            if config.granularity in ("inner", "all") or r.t != last_t:
                row(r.t, r.k, 0, r.grad_norm, r.M, 0.0, 0.0,
                    r.operator_evals, r.jacobian_evals, r.linear_solves)
            last_t = r.t
    return rows


def _dispatch(config: RunConfig, problem, z0: Point):
    if config.algo == "lfcr":
        cfg = lfcr.LfcrConfig(
            c=config.c, H0=config.h0, max_iters=config.max_iters,
            grad_tol=config.grad_tol,
        )
        return lfcr.run_lfcr(problem, z0, cfg)
    if config.algo == "ffcr":
        cfg = ffcr.FfcrConfig(
            epsilon=config.eps, M0=config.m0, D0=config.d0, c=config.c,
            max_outer=config.max_outer,
        )
        return ffcr.run_ffcr(
            problem, z0, cfg,
            bench_stop=config.bench_stop,
            record_inner=config.granularity == "all",
        )
    if config.algo == "eg":
        cfg = baselines.EgConfig(
            eta=config.eta, max_iters=config.max_iters, grad_tol=config.grad_tol
        )
        return baselines.run_eg(problem, z0, cfg)
    cfg = baselines.NewtonMinMaxConfig(
        rho=config.rho_known, c=config.c, max_iters=config.max_iters,
        grad_tol=config.grad_tol,
    )
    return baselines.run_newton_minmax(problem, z0, cfg)


def default_output_dir() -> str:
    return os.environ.get("SADDLECR_OUT_DIR", ".")


def run_experiment(config: RunConfig, csv_path: str | None = None):
    """Execute one configured run and stream its trace to CSV.

    Returns ``(summary, csv_path)``.  The summary includes the final
    gradient norm, iteration and evaluation counts and, where the
    algorithm maintains them, the final curvature and distance
    estimates.
    """
    config.validate()
    problem = build_problem(config)
    if problem.known_saddle() is None:
        raise ConfigError(f"problem {config.problem!r} has no known saddle point")
    z0 = problems.initial_point(problem, config.seed)

    start = time.perf_counter()
    failure = None
    try:
        output = _dispatch(config, problem, z0)
    except ffcr.StageFailure as exc:
        failure = str(exc)
        output = exc.output
    except (lfcr.BacktrackingError, lfcr.DegenerateStepError) as exc:
        raise AlgorithmFailure(str(exc)) from exc
    wall_ms = (time.perf_counter() - start) * 1e3

    final_grad = grad_norm(problem, _final_point(output))
    summary = {
        "algorithm": config.algo,
        "problem": config.problem,
        "n": config.n,
        "rho": config.rho,
        "seed": config.seed,
        "final_grad_norm": final_grad,
        "iterations": _iteration_count(output),
        "operator_evals": output.operator_evals,
        "jacobian_evals": output.jacobian_evals,
        "linear_solves": output.linear_solves,
        "wall_ms": wall_ms,
        "converged": output.converged,
    }
    if config.algo == "lfcr":
        summary["H_final"] = output.H_final
    if config.algo == "ffcr":
        summary["D_final"] = output.D_final
        summary["M_final"] = output.M_final
        summary["stages"] = output.stages
    if failure is not None:
        summary["failure"] = failure

    if csv_path is None:
        base = f"{config.algo}_{config.problem}_n{config.n}_seed{config.seed}.csv"
        csv_path = os.path.join(config.out or default_output_dir(), base)
    os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
    _write_rows(csv_path, _trace_rows(config, output, wall_ms))
    with open(_summary_path(csv_path), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if failure is not None:
        raise AlgorithmFailure(failure)
    return summary, csv_path


def _summary_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + ".summary.json"


def _final_point(output) -> Point:
    if hasattr(output, "z_bar"):
        return output.z_bar
    return output.z_final


def _iteration_count(output) -> int:
    if hasattr(output, "total_inner_iterations"):
        return output.total_inner_iterations
    return output.iterations


def _same_instance(a: RunConfig, b: RunConfig) -> bool:
    return (
        a.problem == b.problem
        and a.n == b.n
        and a.rho == b.rho
        and a.seed == b.seed
    )


def convergence_series(config: RunConfig, problem, z0: Point):
    """Run one configuration and return [(iteration, op_evals, grad_norm)].

    For the staged algorithm the iteration axis counts inner cubic-step
    iterations and the gradient is the true (unregularized) one,
    recorded at every averaged inner iterate; the run is cut short once
    the smallest gradient the caller can still use has been reached.
    """
    if config.algo != "ffcr":
        output = _dispatch(config, problem, z0)
        return [(r.k, r.operator_evals, r.grad_norm_avg) if config.algo == "lfcr"
                else (r.k, r.operator_evals, r.grad_norm)
                for r in output.trace]

    count = CountingOracle(problem)
    series: list[tuple[int, int, float]] = []
    target = config.bench_stop if config.bench_stop is not None else config.eps

    def recorder(z: np.ndarray) -> bool:
        g = float(np.linalg.norm(count.operator(z)))
        series.append((len(series) + 1, count.operator_evals, g))
        return g <= target

    cfg = ffcr.FfcrConfig(
        epsilon=config.eps, M0=config.m0, D0=config.d0, c=config.c,
        max_outer=config.max_outer,
    )
    ffcr.run_ffcr(count, z0, cfg, bench_stop=recorder)
    return series


def compare_report(
    configs: Sequence[RunConfig],
    csv_path: str | None = None,
    thresholds: Sequence[float] = COMPARE_THRESHOLDS,
):
    """Align several runs on one instance into an iterations/evals table.

    Each cell is the first iteration (and cumulative operator-eval
    count) at which the recorded gradient norm dropped to the column
    threshold; unreached thresholds are left empty in the CSV and are
    ``None`` in the returned rows.
    """
    if len(configs) < 2:
        raise ConfigError("compare requires at least two configurations")
    head = configs[0]
    for other in configs[1:]:
        if not _same_instance(head, other):
            raise ConfigError("compare configurations target different instances")

    problem = build_problem(head)
    z0 = problems.initial_point(problem, head.seed)

    table = []
    for config in configs:
        config.validate()
        series = convergence_series(config, problem, z0)
        entry = {"algorithm": config.algo, "thresholds": {}}
        for thr in thresholds:
            hit = next(((it, ev) for it, ev, g in series if g <= thr), None)
            entry["thresholds"][thr] = hit
        table.append(entry)

    if csv_path is not None:
        os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["schema", "algorithm"]
                + [f"iters_to_{thr:g}" for thr in thresholds]
                + [f"evals_to_{thr:g}" for thr in thresholds]
            )
            for entry in table:
                cells_it = [
                    "" if entry["thresholds"][t] is None else entry["thresholds"][t][0]
                    for t in thresholds
                ]
                cells_ev = [
                    "" if entry["thresholds"][t] is None else entry["thresholds"][t][1]
                    for t in thresholds
                ]
                writer.writerow(
                    [SCHEMA_TAG, entry["algorithm"]] + cells_it + cells_ev
                )
    return table
