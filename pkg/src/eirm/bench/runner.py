"""Planner x run benchmark matrices over shared query sequences."""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..baselines import BaselineConfig, LazyPrmStarSession, rrt_connect
from ..planner import Budget, PlannerConfig, Query, Session
from .queries import queries_for, sequence_hash
from .scenarios import DEFAULT_BUDGETS, build_scenario

PLANNER_NAMES = ("eirm", "eit", "lazyprmstar", "rrtconnect")


@dataclass(frozen=True)
class BenchmarkSpec:
    scenario_name: str
    dim: int
    query_mode: str = "subregion"
    n_queries: int = 20
    n_runs: int = 25
    budget_seconds: Optional[float] = None     # None: per-dim default
    budget_iterations: Optional[int] = None    # set for deterministic runs
    planners: tuple[str, ...] = ("eirm", "lazyprmstar", "rrtconnect")
    master_seed: int = 7
    initial_only: bool = False

    def __post_init__(self):
        if self.n_queries < 1 or self.n_runs < 1:
            raise ValueError("need n_queries >= 1 and n_runs >= 1")
        for p in self.planners:
            if p not in PLANNER_NAMES:
                raise ValueError(f"unknown planner {p!r}")

    def budget(self) -> Budget:
        if self.budget_iterations is not None:
            return Budget(iterations=self.budget_iterations)
        seconds = self.budget_seconds
        if seconds is None:
            seconds = DEFAULT_BUDGETS.get(self.dim, 2.0)
        return Budget(seconds=seconds)


@dataclass
class Row:
    planner: str
    run: int
    query: int
    t_init: float
    c_init: float
    c_final: float
    full_checks: int
    sparse_checks: int
    graph_size_at_init: int
    solved: bool


CSV_HEADER = ("planner,run,query,t_init,c_init,c_final,full_checks,"
              "sparse_checks,graph_size_at_init,solved")


def derive_seed(master_seed: int, planner: str, run: int) -> int:
    """Stable per-(planner, run) seed derived from the master seed."""
    seq = np.random.SeedSequence([master_seed, zlib.crc32(planner.encode()), run])
    return int(seq.generate_state(1, dtype=np.uint32)[0])


def _solve_with_planner(planner: str, scenario, queries: list[Query],
                        seed: int, initial_only: bool):
    if planner in ("eirm", "eit"):
        config = PlannerConfig(seed=seed, eit_like=(planner == "eit"))
        session = Session(scenario, config)
        return session.solve_sequence(queries, initial_only=initial_only)
    if planner == "lazyprmstar":
        session = LazyPrmStarSession(
            scenario, rng=np.random.default_rng(np.random.SeedSequence(seed)))
        return session.solve_sequence(queries, initial_only=initial_only)
    if planner == "rrtconnect":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        return [rrt_connect(q, scenario, BaselineConfig(), rng=rng) for q in queries]
    raise ValueError(f"unknown planner {planner!r}")


def _run_one(spec: BenchmarkSpec, planner: str, run: int) -> list[Row]:
    """One (planner, run) cell; rebuilds everything locally so cells are
    independent and safe to execute in worker processes."""
    scenario = build_scenario(spec.scenario_name, spec.dim)
    queries = queries_for(scenario, spec.scenario_name, spec.query_mode,
                          spec.n_queries, spec.master_seed, spec.budget())
    seed = derive_seed(spec.master_seed, planner, run)
    try:
        results = _solve_with_planner(planner, scenario, queries, seed,
                                      spec.initial_only)
    except Exception as exc:   # a crashed planner yields failed rows
        return [Row(planner, run, qi, float("inf"), float("inf"), float("inf"),
                    0, 0, 0, False) for qi in range(spec.n_queries)]
    rows = []
    for qi, res in enumerate(results):
        rows.append(Row(
            planner=planner, run=run, query=qi,
            t_init=res.t_init, c_init=res.c_init, c_final=res.c_final,
            full_checks=res.full_checks, sparse_checks=res.sparse_checks,
            graph_size_at_init=res.graph_size_at_init, solved=res.solved))
    return rows


def _worker(args):
    return _run_one(*args)


def default_threads() -> int:
    env = os.environ.get("BENCH_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(os.cpu_count() or 1, 8))


def run_benchmark(spec: BenchmarkSpec, threads: Optional[int] = None) -> list[Row]:
    """Execute the full planner x run matrix and return sorted rows."""
    cells = [(spec, planner, run)
             for planner in spec.planners for run in range(spec.n_runs)]
    threads = threads if threads is not None else default_threads()
    if threads <= 1 or len(cells) == 1:
        results = [_run_one(*cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_worker, cells))
    rows = [row for cell_rows in results for row in cell_rows]
    rows.sort(key=lambda r: (r.planner, r.run, r.query))
    return rows


def shared_query_hash(spec: BenchmarkSpec) -> str:
    scenario = build_scenario(spec.scenario_name, spec.dim)
    queries = queries_for(scenario, spec.scenario_name, spec.query_mode,
                          spec.n_queries, spec.master_seed, spec.budget())
    return sequence_hash(queries)


def _fmt(value: float) -> str:
    if value == float("inf"):
        return "inf"
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def rows_to_csv(rows: list[Row]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.planner, str(r.run), str(r.query), _fmt(r.t_init),
            _fmt(r.c_init), _fmt(r.c_final), str(r.full_checks),
            str(r.sparse_checks), str(r.graph_size_at_init),
            "true" if r.solved else "false"]))
    return "\n".join(lines) + "\n"
