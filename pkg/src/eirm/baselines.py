"""Baseline planners under the same result contract as the primary planner.

rrt_connect is the standard bidirectional tree planner: feasible, not
anytime, no state carried between queries. LazyPrmStarSession keeps one
optimistically searched roadmap that only ever grows, validating shortest
paths lazily; any reuse of old validation effort is coincidental. Both are
trend baselines, not ports of any particular library implementation.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import space
from .approximation import rgg_knn_count
from .planner import Budget, PlanResult, Query, QueryRejected, _validate_query
from .space import Edge, Scenario, State

INF = math.inf

# Steer limits from the reference experiment setup, by dimension.
_STEER_BY_DIM = {2: 0.3, 4: 0.5, 8: 1.25}


@dataclass
class BaselineConfig:
    max_edge_length: Optional[float] = None   # None: resolved from dimension
    goal_bias: float = 0.0
    eta: float = 1.001
    m: int = 100

    def __post_init__(self):
        if self.max_edge_length is not None and not self.max_edge_length > 0:
            raise ValueError("max_edge_length must be positive")
        if not 0.0 <= self.goal_bias < 1.0:
            raise ValueError("goal_bias must be in [0, 1)")
        if self.m < 1:
            raise ValueError("m must be >= 1")

    def steer_limit(self, dim: int) -> float:
        if self.max_edge_length is not None:
            return self.max_edge_length
        return _STEER_BY_DIM.get(dim, 0.5)


class _BudgetClock:
    def __init__(self, budget: Budget):
        self.budget = budget
        self.t0 = time.perf_counter()
        self.iterations = 0

    def tick(self, n: int = 1):
        self.iterations += n

    def exhausted(self) -> bool:
        if self.budget.iterations is not None:
            return self.iterations >= self.budget.iterations
        return time.perf_counter() - self.t0 >= self.budget.seconds

    def now(self) -> float:
        if self.budget.iterations is not None:
            return float(self.iterations)
        return time.perf_counter() - self.t0


def _no_solution(clock: _BudgetClock, full: int, graph: int,
                 error: Optional[str] = None) -> PlanResult:
    return PlanResult(status="no_solution", path=None, t_init=INF, c_init=INF,
                      c_final=INF, full_checks=full, sparse_checks=0,
                      batches_used=0, graph_size_at_init=graph,
                      batches_at_init=0, keep_buffer_size=0, error=error)


# ----------------------------------------------------------------------
# RRT-Connect
# ----------------------------------------------------------------------

class _Tree:
    def __init__(self, root: State):
        self.states = [root]
        self.coords = [root.coords]
        self.parents = [-1]

    def __len__(self):
        return len(self.states)

    def nearest(self, coords: np.ndarray) -> int:
        arr = np.asarray(self.coords)
        return int(np.argmin(np.linalg.norm(arr - coords, axis=1)))

    def add(self, state: State, parent: int) -> int:
        self.states.append(state)
        self.coords.append(state.coords)
        self.parents.append(parent)
        return len(self.states) - 1

    def path_to_root(self, idx: int) -> list[State]:
        out = []
        while idx != -1:
            out.append(self.states[idx])
            idx = self.parents[idx]
        return out


def rrt_connect(query: Query, scenario: Scenario,
                config: Optional[BaselineConfig] = None,
                rng: Optional[np.random.Generator] = None,
                session=None) -> PlanResult:
    """Grow trees from start and goal, alternating extend and connect.

    Terminates at the first connection: c_final equals c_init. Every tree
    edge is validated at full resolution before insertion.
    """
    config = config or BaselineConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    _validate_query(scenario, query)

    goal = query.goals[0]
    ids = itertools.count()
    start = State(next(ids), np.asarray(query.start.coords, dtype=float))
    goal = State(next(ids), np.asarray(goal.coords, dtype=float))
    steer = config.steer_limit(scenario.dim)
    clock = _BudgetClock(query.budget)
    full_checks = 0

    tree_a, tree_b = _Tree(start), _Tree(goal)
    a_is_start = True
    lo, hi = scenario.bounds[:, 0], scenario.bounds[:, 1]

    def check(x: State, y: State) -> bool:
        nonlocal full_checks
        status, n = space.check_edge_full(Edge.between(x, y), scenario)
        full_checks += n
        return status.kind == "valid"

    def extend(tree: _Tree, target: np.ndarray):
        """Returns (outcome, node index). Outcome: reached/advanced/trapped."""
        near = tree.nearest(target)
        base = tree.coords[near]
        delta = target - base
        dist = float(np.linalg.norm(delta))
        if dist < 1e-12:
            return "reached", near
        if dist <= steer:
            new_coords = target
            outcome = "reached"
        else:
            new_coords = base + delta * (steer / dist)
            outcome = "advanced"
        new_state = State(next(ids), new_coords)
        if not space.is_state_valid(new_state, scenario):
            return "trapped", near
        if not check(tree.states[near], new_state):
            return "trapped", near
        return outcome, tree.add(new_state, near)

    while not clock.exhausted():
        clock.tick()
        if config.goal_bias > 0 and rng.random() < config.goal_bias:
            sample = goal.coords if a_is_start else start.coords
        else:
            sample = rng.uniform(lo, hi)
        outcome, idx = extend(tree_a, sample)
        if outcome != "trapped":
            target = tree_a.coords[idx]
            outcome_b, idx_b = "trapped", -1
            while not clock.exhausted():
                clock.tick()
                outcome_b, idx_b = extend(tree_b, target)
                if outcome_b != "advanced":
                    break
            if outcome_b == "reached":
                part_a = tree_a.path_to_root(idx)   # meet ... root_a
                part_b = tree_b.path_to_root(idx_b)  # meet ... root_b
                if a_is_start:
                    path = part_a[::-1] + part_b[1:]
                else:
                    path = part_b[::-1] + part_a[1:]
                cost = sum(space.edge_cost(u, v) for u, v in zip(path, path[1:]))
                t = clock.now()
                return PlanResult(
                    status="solved", path=path, t_init=t, c_init=cost,
                    c_final=cost, full_checks=full_checks, sparse_checks=0,
                    batches_used=0,
                    graph_size_at_init=len(tree_a) + len(tree_b),
                    batches_at_init=0, keep_buffer_size=0)
        if len(tree_b) < len(tree_a):
            tree_a, tree_b = tree_b, tree_a
            a_is_start = not a_is_start

    return _no_solution(clock, full_checks, len(tree_a) + len(tree_b))


# ----------------------------------------------------------------------
# LazyPRM*
# ----------------------------------------------------------------------

class LazyPrmStarSession:
    """One ever-growing roadmap searched optimistically across queries.

    Edges start with unknown validity; a candidate shortest path is validated
    at full resolution and failing edges are removed. After each solved path
    a batch of samples is added and the search repeats until the budget ends,
    so the graph grows within and across queries.
    """

    def __init__(self, scenario: Scenario, config: Optional[BaselineConfig] = None,
                 rng: Optional[np.random.Generator] = None):
        self.scenario = scenario
        self.config = config or BaselineConfig()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._ids = itertools.count()
        self.states: dict[int, State] = {}
        self.adjacency: dict[int, dict[int, float]] = {}
        self.validated: set[tuple[int, int]] = set()
        self._interned: dict[bytes, State] = {}
        self.vertex_history: list[int] = []   # roadmap size after each query

    # -- roadmap growth ------------------------------------------------

    def _intern(self, coords: np.ndarray) -> State:
        coords = np.ascontiguousarray(coords, dtype=float)
        key = coords.tobytes()
        state = self._interned.get(key)
        if state is None:
            state = State(next(self._ids), coords)
            self._interned[key] = state
            self._connect(state)
        return state

    def _connect(self, state: State) -> None:
        self.states[state.id] = state
        self.adjacency.setdefault(state.id, {})
        others = [s for s in self.states.values() if s.id != state.id]
        if not others:
            return
        k = rgg_knn_count(len(self.states), self.scenario.dim, self.config.eta)
        coords = np.asarray([s.coords for s in others])
        dists = np.linalg.norm(coords - state.coords, axis=1)
        order = np.argsort(dists)[:k]
        for i in order:
            nbr = others[int(i)]
            d = float(dists[i])
            self.adjacency[state.id][nbr.id] = d
            self.adjacency[nbr.id][state.id] = d

    def _add_batch(self) -> None:
        lo, hi = self.scenario.bounds[:, 0], self.scenario.bounds[:, 1]
        added = 0
        attempts = 0
        while added < self.config.m:
            attempts += 1
            if attempts > 10_000 * self.config.m:
                raise RuntimeError("free space too thin for uniform sampling")
            coords = self.rng.uniform(lo, hi)
            state = State(-1, coords)
            if space.is_state_valid(state, self.scenario):
                self._intern(coords)
                added += 1

    # -- optimistic search ----------------------------------------------

    def _shortest_path(self, start_id: int, goal_id: int) -> Optional[list[int]]:
        goal_coords = self.states[goal_id].coords
        dist = {start_id: 0.0}
        parent: dict[int, int] = {}
        frontier = [(float(np.linalg.norm(self.states[start_id].coords - goal_coords)),
                     0.0, start_id)]
        closed: set[int] = set()
        while frontier:
            _, g, node = heapq.heappop(frontier)
            if node in closed:
                continue
            if node == goal_id:
                path = [node]
                while path[-1] != start_id:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            closed.add(node)
            node_coords = self.states[node].coords
            for nbr, length in self.adjacency[node].items():
                if nbr in closed:
                    continue
                cand = g + length
                if cand < dist.get(nbr, INF):
                    dist[nbr] = cand
                    parent[nbr] = node
                    h = float(np.linalg.norm(self.states[nbr].coords - goal_coords))
                    heapq.heappush(frontier, (cand + h, cand, nbr))
        return None

    # -- query loop ------------------------------------------------------

    def plan_query(self, query: Query, initial_only: bool = False) -> PlanResult:
        _validate_query(self.scenario, query)
        clock = _BudgetClock(query.budget)
        full_checks = 0
        start = self._intern(query.start.coords)
        goal = self._intern(query.goals[0].coords)

        t_init = c_init = c_final = INF
        graph_at_init = 0
        best_path: Optional[list[State]] = None
        try:
            while not clock.exhausted():
                clock.tick()
                id_path = self._shortest_path(start.id, goal.id)
                if id_path is None:
                    self._add_batch()
                    clock.tick(self.config.m)   # graph growth is counted work
                    continue
                ok = True
                for a, b in zip(id_path, id_path[1:]):
                    key = (a, b) if a < b else (b, a)
                    if key in self.validated:
                        continue
                    if clock.exhausted():
                        ok = False
                        break
                    clock.tick()
                    edge = Edge.between(self.states[a], self.states[b])
                    status, n = space.check_edge_full(edge, self.scenario)
                    full_checks += n
                    if status.kind == "valid":
                        self.validated.add(key)
                    else:
                        del self.adjacency[a][b]
                        del self.adjacency[b][a]
                        ok = False
                        break
                if not ok:
                    continue
                cost = sum(
                    float(np.linalg.norm(self.states[a].coords - self.states[b].coords))
                    for a, b in zip(id_path, id_path[1:]))
                if t_init == INF:
                    t_init = clock.now()
                    c_init = cost
                    graph_at_init = len(self.states)
                if cost < c_final:
                    c_final = cost
                    best_path = [self.states[i] for i in id_path]
                if initial_only:
                    break
                self._add_batch()
                clock.tick(self.config.m)
        except RuntimeError as exc:
            if best_path is None:
                self.vertex_history.append(len(self.states))
                return _no_solution(clock, full_checks, len(self.states), str(exc))

        self.vertex_history.append(len(self.states))
        if best_path is None:
            return _no_solution(clock, full_checks, len(self.states))
        return PlanResult(
            status="solved", path=best_path, t_init=t_init, c_init=c_init,
            c_final=c_final, full_checks=full_checks, sparse_checks=0,
            batches_used=0, graph_size_at_init=graph_at_init,
            batches_at_init=0, keep_buffer_size=0)

    def solve_sequence(self, queries, initial_only: bool = False) -> list[PlanResult]:
        results = []
        for q in queries:
            try:
                results.append(self.plan_query(q, initial_only=initial_only))
            except QueryRejected as exc:
                self.vertex_history.append(len(self.states))
                results.append(_no_solution(_BudgetClock(q.budget), 0,
                                            len(self.states), str(exc)))
        return results


def lazy_prm_star(query: Query, session: LazyPrmStarSession,
                  initial_only: bool = False) -> PlanResult:
    """Plan one query on a persistent lazily validated roadmap."""
    return session.plan_query(query, initial_only=initial_only)
