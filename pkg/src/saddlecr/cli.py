"""Command-line benchmark runner.

Two subcommands: ``run`` executes one configured experiment and writes
its trace CSV plus a JSON summary; ``compare`` runs several
configurations on the same problem instance and writes an aligned
iterations/evaluations-to-threshold table.

Exit codes: 0 on success, 2 on configuration errors, 3 on algorithm
failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    AlgorithmFailure,
    ConfigError,
    GRANULARITIES,
    RunConfig,
    compare_report,
    config_from_mapping,
    parse_config,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--algo", choices=("lfcr", "ffcr", "eg", "newton_minmax"))
    parser.add_argument("--problem", choices=("cubic", "scalar", "bilinear"))
    parser.add_argument("--n", type=int)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--c", type=float)
    parser.add_argument("--H0", dest="h0", type=float)
    parser.add_argument("--M0", dest="m0", type=float)
    parser.add_argument("--D0", dest="d0", type=float)
    parser.add_argument("--eta", type=float)
    parser.add_argument("--rho-known", dest="rho_known", type=float)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--grad-tol", dest="grad_tol", type=float)
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--max-outer", dest="max_outer", type=int)
    parser.add_argument("--bench-stop", dest="bench_stop", type=float)
    parser.add_argument("--out", help="output directory (default $SADDLECR_OUT_DIR)")
    parser.add_argument("--granularity", choices=GRANULARITIES)


def _namespace_to_config(ns: argparse.Namespace) -> RunConfig:
    mapping: dict[str, str] = {}
    if ns.config:
        base = parse_config(ns.config)
    else:
        base = None
    for name in (
        "algo", "problem", "n", "rho", "seed", "c", "h0", "m0", "d0", "eta",
        "rho_known", "eps", "grad_tol", "max_iters", "max_outer", "bench_stop",
        "out", "granularity",
    ):
        value = getattr(ns, name, None)
        if value is not None:
            mapping[name] = str(value)
    if base is not None:
        for key, raw in mapping.items():
            setattr(base, key, _reparse(key, raw))
        base.validate()
        return base
    return config_from_mapping(mapping)


def _reparse(name: str, raw: str):
    from .harness import _coerce

    return _coerce(name, raw)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="saddlecr",
        description="Benchmark runner for cubic-regularized saddle-point solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute one experiment")
    _add_run_flags(run_parser)
    run_parser.add_argument("--csv", help="explicit trace CSV path")

    cmp_parser = sub.add_parser("compare", help="align several runs on one instance")
    cmp_parser.add_argument(
        "--config", action="append", required=True,
        help="config file; repeat for each run (at least two)",
    )
    cmp_parser.add_argument("--csv", help="comparison table CSV path")

    ns = parser.parse_args(argv)
    try:
        if ns.command == "run":
            config = _namespace_to_config(ns)
            summary, csv_path = run_experiment(config, csv_path=ns.csv)
            for key in sorted(summary):
                print(f"{key}={summary[key]}")
            print(f"trace={csv_path}")
            return EXIT_OK
        configs = [parse_config(path) for path in ns.config]
        table = compare_report(configs, csv_path=ns.csv)
        for entry in table:
            cells = ", ".join(
                f"{thr:g}: {'-' if hit is None else hit[0]}"
                for thr, hit in entry["thresholds"].items()
            )
            print(f"{entry['algorithm']}: {cells}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AlgorithmFailure as exc:
        print(f"algorithm failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
