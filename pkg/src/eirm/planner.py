"""Multiquery planning sessions.

A Session owns one scenario, one sample buffer, and the persistent validity
registries. plan_query runs the full anytime loop for a single query:
rewind the approximation, interleave the sparse reverse pass and the fully
validating forward pass, and refine the approximation with replayed batches
whenever neither search can make progress. solve_sequence runs many queries
against the same session so later queries reuse earlier validation effort.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np

from . import space
from .approximation import Approximation, BatchConfig, SampleStarvation
from .search import CheckCounters, TwoPhaseSearch
from .space import Scenario, State

INF = math.inf


@dataclass(frozen=True)
class Budget:
    """Per-query stopping rule: wall-clock seconds or a loop-iteration cap.

    Iteration budgets make runs hardware-independent and byte-reproducible;
    wall-clock budgets are for benchmarking.
    """

    seconds: Optional[float] = None
    iterations: Optional[int] = None

    def __post_init__(self):
        if (self.seconds is None) == (self.iterations is None):
            raise ValueError("budget needs exactly one of seconds/iterations")
        if self.seconds is not None and not self.seconds > 0:
            raise ValueError("budget must be positive")
        if self.iterations is not None and not self.iterations > 0:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class Query:
    start: State
    goals: tuple[State, ...]
    budget: Budget

    def __post_init__(self):
        if not self.goals:
            raise ValueError("query needs at least one goal")


@dataclass
class PlannerConfig:
    """Validated planner settings; the defaults reproduce the reference setup."""

    m: int = 100
    eta: float = 1.001
    sparse_factor: int = 100
    prune_threshold: int = 50_000
    w_after_solution: float = 1.0
    d_bar: Optional[Callable[[State], float]] = None   # None = zero heuristic
    eit_like: bool = False
    seed: int = 0
    max_batches: Optional[int] = None   # cap approximation growth (tests)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.eta < 1.0:
            raise ValueError("eta must be >= 1")
        if self.sparse_factor < 1:
            raise ValueError("sparse_factor must be >= 1")
        if self.prune_threshold < 0:
            raise ValueError("prune_threshold must be >= 0")
        if not self.w_after_solution >= 1.0:
            raise ValueError("w_after_solution must be >= 1")
        if self.max_batches is not None and self.max_batches < 1:
            raise ValueError("max_batches must be >= 1")


def configure(**overrides) -> PlannerConfig:
    """Build a validated configuration from keyword overrides."""
    return PlannerConfig(**overrides)


@dataclass
class PlanResult:
    """Outcome and effort accounting for one query."""

    status: str                       # "solved" | "no_solution"
    path: Optional[list[State]]
    t_init: float                     # seconds, or iterations in iteration mode
    c_init: float
    c_final: float
    full_checks: int
    sparse_checks: int
    batches_used: int
    graph_size_at_init: int
    batches_at_init: int
    keep_buffer_size: int
    error: Optional[str] = None

    @property
    def solved(self) -> bool:
        return self.status == "solved"


class QueryRejected(ValueError):
    pass


class Session:
    """One scenario plus all state carried across its queries."""

    def __init__(self, scenario: Scenario, config: Optional[PlannerConfig] = None):
        self.scenario = scenario
        self.config = config or PlannerConfig()
        self.rng = np.random.default_rng(np.random.SeedSequence(self.config.seed))
        self.approx = Approximation(
            scenario,
            BatchConfig(m=self.config.m, eta=self.config.eta,
                        prune_threshold=self.config.prune_threshold),
            self.rng,
        )
        self.last_search: Optional[TwoPhaseSearch] = None

    def plan_query(self, query: Query, on_event=None, initial_only: bool = False) -> PlanResult:
        return plan_query(self, query, on_event=on_event, initial_only=initial_only)

    def solve_sequence(self, queries, on_event=None, initial_only: bool = False):
        return solve_sequence(self, queries, on_event=on_event, initial_only=initial_only)

    def snapshot(self) -> dict:
        return self.approx.snapshot()

    def restore(self, snap: dict) -> None:
        self.approx.restore(snap)


def create_session(scenario: Scenario, config: Optional[PlannerConfig] = None) -> Session:
    return Session(scenario, config)


def _validate_query(s: Scenario, query: Query) -> None:
    for tag, st in [("start", query.start)] + [("goal", g) for g in query.goals]:
        if st.coords.shape != (s.dim,):
            raise QueryRejected(f"{tag} has dimension {st.coords.shape[0]}, scenario {s.dim}")
        if not s.contains(st.coords):
            raise QueryRejected(f"{tag} lies outside the scenario bounds")
        if not space.is_state_valid(st, s):
            raise QueryRejected(f"{tag} lies inside an obstacle")


def plan_query(session: Session, query: Query, on_event=None,
               initial_only: bool = False) -> PlanResult:
    """Run the anytime loop for one query against a persistent session."""
    _validate_query(session.scenario, query)
    config = session.config
    approx = session.approx
    if config.eit_like:
        approx.reset_persistent()

    t0 = time.perf_counter()
    iteration_mode = query.budget.iterations is not None
    iterations = 0

    def out_of_budget() -> bool:
        if iteration_mode:
            return iterations >= query.budget.iterations
        return time.perf_counter() - t0 >= query.budget.seconds

    def now() -> float:
        return float(iterations) if iteration_mode else time.perf_counter() - t0

    start = approx.intern_state(query.start.coords)
    goals = tuple(approx.intern_state(g.coords) for g in query.goals)
    keep_size = len(approx.keep_buffer)
    counters = CheckCounters()

    start_coords = start.coords
    goal_coords = [g.coords for g in goals]

    def f_hat(x: State) -> float:
        c = x.coords
        return (math.dist(start_coords, c)
                + min(math.dist(c, gc) for gc in goal_coords))

    error = None
    t_init = c_init = INF
    graph_at_init = 0
    batches_at_init = 0
    solutions: list[float] = []
    search = None
    try:
        batch = approx.rewind_for_query(start, goals)
        batches_used = 1 if batch else 0
        search = TwoPhaseSearch(approx, config, counters, start, goals)
        search.restart_reverse()
        idle_snapshot = None
        needs_restart = False

        while not out_of_budget():
            iterations += 1
            if search.best_rev_edge_improves_sol():
                search.reverse_iterate()
            elif search.forward_can_improve():
                event = search.forward_iterate()
                if event == "collision":
                    search.restart_reverse()
                elif event == "solution":
                    needs_restart = True   # cost ordering needs fresh labels
                    if not solutions:
                        t_init = now()
                        c_init = search.c_curr
                        graph_at_init = len(approx.active)
                        batches_at_init = batches_used
                    solutions.append(search.c_curr)
                    if on_event is not None:
                        on_event({
                            "type": "solution_found",
                            "cost": search.c_curr,
                            "time": now(),
                            "full_checks": counters.full_evals,
                            "sparse_checks": counters.sparse_evals,
                        })
                    if initial_only:
                        break
            else:
                capped = (config.max_batches is not None
                          and batches_used >= config.max_batches)
                if capped:
                    new: list[State] = []
                else:
                    bound = search.c_curr
                    new, _ = approx.refine_approximation(bound, config.m, f_hat)
                    if new:
                        batches_used += 1
                        approx.insert_active(new)
                        if on_event is not None:
                            on_event({"type": "batch_added", "size": len(new),
                                      "states": new, "bound": bound})
                if not new:
                    snap = (counters.full_evals, counters.sparse_evals,
                            counters.relaxations, len(approx.e_valid),
                            len(approx.e_invalid), len(approx.sparse_certified),
                            len(approx.buffer), approx.buffer.cursor, search.c_curr)
                    if snap == idle_snapshot:
                        break   # fixed point: nothing left to try at this cap
                    idle_snapshot = snap
                else:
                    idle_snapshot = None
                if new or needs_restart:
                    # an unchanged graph keeps its converged labels
                    search.restart_reverse()
                    needs_restart = False
    except SampleStarvation as exc:
        error = str(exc)

    session.last_search = search
    path = None
    c_final = INF
    if solutions:
        c_final = solutions[-1]
        goal = search.best_goal()
        path = search.extract_path(goal)
    else:
        graph_at_init = len(approx.active)
        batches_at_init = batches_used if search is not None else 0

    approx.finish_query_prune(start, goals)
    return PlanResult(
        status="solved" if solutions else "no_solution",
        path=path,
        t_init=t_init,
        c_init=c_init,
        c_final=c_final,
        full_checks=counters.full_evals,
        sparse_checks=counters.sparse_evals,
        batches_used=batches_used if search is not None else 0,
        graph_size_at_init=graph_at_init,
        batches_at_init=batches_at_init,
        keep_buffer_size=keep_size,
        error=error,
    )


def solve_sequence(session: Session, queries: Iterable[Query], on_event=None,
                   initial_only: bool = False) -> list[PlanResult]:
    """Plan queries in order against one persistent session.

    A failed or rejected query is recorded in its result and the sequence
    continues; session state persists regardless.
    """
    results = []
    for query in queries:
        try:
            results.append(plan_query(session, query, on_event=on_event,
                                       initial_only=initial_only))
        except QueryRejected as exc:
            results.append(PlanResult(
                status="no_solution", path=None, t_init=INF, c_init=INF,
                c_final=INF, full_checks=0, sparse_checks=0, batches_used=0,
                graph_size_at_init=0, batches_at_init=0,
                keep_buffer_size=len(session.approx.keep_buffer),
                error=str(exc)))
    return results


def extract_path(session: Session, goal_reached: State) -> list[State]:
    """Materialize the forward-tree path to a reached goal (debug surface)."""
    if session.last_search is None:
        raise RuntimeError("no query has been planned in this session")
    return session.last_search.extract_path(goal_reached)
