"""Seeded multiquery sequences shared by every planner and run."""
from __future__ import annotations

import hashlib
import itertools

import numpy as np

from ..planner import Budget, Query
from ..space import Scenario, State, is_state_valid
from .scenarios import query_boxes

_REJECTION_CAP = 100_000


def generate_queries(scenario: Scenario, mode: str, n: int, seed: int,
                     budget: Budget,
                     boxes: tuple[np.ndarray, np.ndarray] | None = None,
                     ) -> list[Query]:
    """Sample n start/goal queries as a pure function of its arguments.

    subregion mode draws starts from the first box and goals from the second;
    global mode draws both uniformly from the free space by rejection.
    """
    if n < 1:
        raise ValueError("need n >= 1 queries")
    if mode not in ("subregion", "global"):
        raise ValueError(f"unknown query mode {mode!r}")
    if mode == "subregion" and boxes is None:
        raise ValueError("subregion mode needs start/goal boxes")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    ids = itertools.count()
    queries = []
    for _ in range(n):
        if mode == "subregion":
            start = _uniform_in_box(rng, boxes[0], ids)
            goal = _uniform_in_box(rng, boxes[1], ids)
        else:
            start = _uniform_free(rng, scenario, ids)
            goal = _uniform_free(rng, scenario, ids)
        queries.append(Query(start=start, goals=(goal,), budget=budget))
    return queries


def _uniform_in_box(rng, box: np.ndarray, ids) -> State:
    return State(next(ids), rng.uniform(box[:, 0], box[:, 1]))


def _uniform_free(rng, scenario: Scenario, ids) -> State:
    for _ in range(_REJECTION_CAP):
        state = State(next(ids), rng.uniform(scenario.bounds[:, 0],
                                             scenario.bounds[:, 1]))
        if is_state_valid(state, scenario):
            return state
    raise RuntimeError("rejection sampling starved while generating queries")


def sequence_hash(queries: list[Query]) -> str:
    """Stable fingerprint of a query sequence, recorded with the results."""
    digest = hashlib.sha256()
    for q in queries:
        digest.update(np.ascontiguousarray(q.start.coords).tobytes())
        for g in q.goals:
            digest.update(np.ascontiguousarray(g.coords).tobytes())
    return digest.hexdigest()


def queries_for(scenario: Scenario, scenario_name: str, mode: str, n: int,
                seed: int, budget: Budget) -> list[Query]:
    boxes = query_boxes(scenario_name, scenario.dim) if mode == "subregion" else None
    return generate_queries(scenario, mode, n, seed, budget, boxes=boxes)
