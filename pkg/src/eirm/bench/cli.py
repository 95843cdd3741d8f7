"""Benchmark command line.

    bench run --scenario wall_gap --dim 2 --mode subregion --queries 20 \
        --runs 25 --budget 0.5 --planners eirm,lazyprmstar,rrtconnect \
        --seed 7 --out DIR [--initial-only] [--iterations N]
    bench scenarios export DIR

BENCH_THREADS caps the number of parallel runs.
"""
from __future__ import annotations

import argparse
import sys

from .. import __version__
from .aggregate import aggregate, emit_outputs
from .runner import (BenchmarkSpec, PLANNER_NAMES, run_benchmark,
                     shared_query_hash)
from .scenarios import SCENARIO_NAMES, SUPPORTED_DIMS, export_scenarios


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench",
                                     description="multiquery planner benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a planner x run benchmark matrix")
    run.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    run.add_argument("--dim", type=int, required=True, choices=SUPPORTED_DIMS)
    run.add_argument("--mode", default="subregion", choices=("subregion", "global"))
    run.add_argument("--queries", type=int, default=20)
    run.add_argument("--runs", type=int, default=25)
    run.add_argument("--budget", type=float, default=None,
                     help="seconds per query (default: per-dimension)")
    run.add_argument("--iterations", type=int, default=None,
                     help="iteration budget per query (deterministic mode)")
    run.add_argument("--planners", default="eirm,lazyprmstar,rrtconnect",
                     help=f"comma list from {','.join(PLANNER_NAMES)}")
    run.add_argument("--seed", type=int, default=7)
    run.add_argument("--out", required=True)
    run.add_argument("--initial-only", action="store_true")
    run.add_argument("--threads", type=int, default=None)

    scen = sub.add_parser("scenarios", help="scenario utilities")
    scen_sub = scen.add_subparsers(dest="scenario_command", required=True)
    exp = scen_sub.add_parser("export", help="write reference scenario JSON files")
    exp.add_argument("out_dir")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "scenarios":
            written = export_scenarios(args.out_dir)
            for path in written:
                print(path)
            return 0

        planners = tuple(p.strip() for p in args.planners.split(",") if p.strip())
        spec = BenchmarkSpec(
            scenario_name=args.scenario,
            dim=args.dim,
            query_mode=args.mode,
            n_queries=args.queries,
            n_runs=args.runs,
            budget_seconds=args.budget,
            budget_iterations=args.iterations,
            planners=planners,
            master_seed=args.seed,
            initial_only=args.initial_only,
        )
        rows = run_benchmark(spec, threads=args.threads)
        summary = aggregate(rows)
        emit_outputs(rows, summary, args.out, spec, shared_query_hash(spec),
                     __version__)
        print(f"wrote {len(rows)} rows to {args.out}/results.csv")
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
