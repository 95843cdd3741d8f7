"""Rewindable roadmap approximation with persistent validation knowledge.

One Approximation lives for a whole multiquery session. Samples are stored in
an append-only buffer and replayed in the same order for every query, so each
query starts from the same coarse graph and grows it identically. Edge
validity (full, sparse progress, invalid) persists across queries; the active
vertex set does not.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.spatial import cKDTree

from . import space
from .space import Edge, Scenario, State, ValidationStatus

EULER = math.e


class SampleStarvation(RuntimeError):
    """Raised when rejection sampling cannot find a free state."""


class RegistryConflict(RuntimeError):
    """Raised on a contradictory edge-status update (valid vs invalid)."""


@dataclass
class BatchConfig:
    """Sampling and graph-growth parameters."""

    m: int = 100                    # samples per batch
    eta: float = 1.001              # k-NN scale factor
    prune_threshold: int = 50_000   # keep a past start/goal above this effort

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("batch size m must be >= 1")
        if self.eta < 1.0:
            raise ValueError("knn scale eta must be >= 1")
        if self.prune_threshold < 0:
            raise ValueError("prune_threshold must be >= 0")


def rgg_knn_count(n_vertices: int, dim: int, eta: float) -> int:
    """k for the standard k-nearest RGG connection rule, floored at 1."""
    if n_vertices < 2:
        return 1
    k = eta * EULER * (1.0 + 1.0 / dim) * math.log(n_vertices)
    return max(1, int(math.ceil(k)))


class SampleBuffer:
    """Append-only sequence of sampled states with a per-query replay cursor."""

    def __init__(self):
        self.states: list[State] = []
        self.cursor: int = 0

    def __len__(self):
        return len(self.states)

    def reset_cursor(self):
        self.cursor = 0


class Approximation:
    """Active RGG vertex set plus the session-persistent registries.

    Persistent across queries: the sample buffer, valid/invalid edge sets,
    sparse-check progress, and the keep-buffer of expensive past starts and
    goals. Rebuilt per query: the active vertex set and its k-NN index.
    """

    # Rejection-sampling attempts per state before giving up loudly.
    SAMPLE_ATTEMPT_CAP = 10_000
    # refine_approximation inspects at most this many states per requested one.
    INSPECTION_FACTOR = 100

    def __init__(self, scenario: Scenario, config: BatchConfig,
                 rng: np.random.Generator):
        self.scenario = scenario
        self.config = config
        self.rng = rng
        self.buffer = SampleBuffer()
        self.e_valid: set[tuple[int, int]] = set()
        self.e_invalid: set[tuple[int, int]] = set()
        self.sparse_certified: dict[tuple[int, int], int] = {}
        self.valid_partners: dict[int, set[int]] = {}
        self.keep_buffer: dict[int, State] = {}
        self.active: dict[int, State] = {}
        self._ids = itertools.count()
        self._interned: dict[bytes, State] = {}
        self._edges: dict[tuple[int, int], Edge] = {}
        self._tree: Optional[cKDTree] = None
        self._tree_ids: list[int] = []
        self._neighbors: dict[int, set[int]] = {}
        self._pool = np.empty((0, scenario.dim))
        self._pool_index = 0

    # ------------------------------------------------------------------
    # states
    # ------------------------------------------------------------------

    def intern_state(self, coords: np.ndarray) -> State:
        """Return the session state at these exact coordinates, creating it
        once. Repeated starts/goals keep their identity across queries."""
        coords = np.ascontiguousarray(coords, dtype=float)
        key = coords.tobytes()
        state = self._interned.get(key)
        if state is None:
            state = State(next(self._ids), coords)
            self._interned[key] = state
        return state

    def _sample_valid_uniform(self) -> State:
        attempts = 0
        while attempts < self.SAMPLE_ATTEMPT_CAP:
            if self._pool_index >= len(self._pool):
                lo = self.scenario.bounds[:, 0]
                hi = self.scenario.bounds[:, 1]
                self._pool = self.rng.uniform(lo, hi, size=(64, self.scenario.dim))
                self._pool_index = 0
            coords = self._pool[self._pool_index]
            self._pool_index += 1
            attempts += 1
            free = True
            for obs in self.scenario.obstacles:
                if np.all(coords > obs[:, 0]) and np.all(coords < obs[:, 1]):
                    free = False
                    break
            if free:
                return State(next(self._ids), coords.copy())
        raise SampleStarvation(
            f"no free sample found in {self.SAMPLE_ATTEMPT_CAP} attempts; free space too thin"
        )

    # ------------------------------------------------------------------
    # registries
    # ------------------------------------------------------------------

    def edge(self, x: State, y: State) -> Edge:
        key = (x.id, y.id) if x.id < y.id else (y.id, x.id)
        cached = self._edges.get(key)
        if cached is None:
            cached = Edge.between(x, y)
            self._edges[key] = cached
        return cached

    def edge_status(self, a: int, b: int) -> ValidationStatus:
        key = (a, b) if a < b else (b, a)
        if key in self.e_valid:
            return space.VALID
        if key in self.e_invalid:
            return space.INVALID
        certified = self.sparse_certified.get(key)
        if certified:
            return space.sparse_valid(certified)
        return space.UNKNOWN

    def record_edge_status(self, edge: Edge, status: ValidationStatus) -> None:
        """Merge new validation knowledge; Valid and Invalid are permanent."""
        key = edge.key
        if status.kind == "valid":
            if key in self.e_invalid:
                raise RegistryConflict(f"edge {key} recorded valid after invalid")
            if key not in self.e_valid:
                self.e_valid.add(key)
                self.sparse_certified.pop(key, None)
                self.valid_partners.setdefault(key[0], set()).add(key[1])
                self.valid_partners.setdefault(key[1], set()).add(key[0])
        elif status.kind == "invalid":
            if key in self.e_valid:
                raise RegistryConflict(f"edge {key} recorded invalid after valid")
            self.e_invalid.add(key)
            self.sparse_certified.pop(key, None)
        elif status.kind == "sparse":
            if key in self.e_valid or key in self.e_invalid:
                return
            prior = self.sparse_certified.get(key, 0)
            if status.certified > prior:
                self.sparse_certified[key] = status.certified
        else:
            raise ValueError(f"cannot record status {status!r}")

    def remaining_effort(self, x: State, y: State) -> int:
        return space.edge_effort_estimate(
            self.edge(x, y), self.edge_status(x.id, y.id), self.scenario.resolution
        )

    # ------------------------------------------------------------------
    # active set and k-NN index
    # ------------------------------------------------------------------

    def _rebuild_index(self):
        self._tree_ids = list(self.active.keys())
        self._neighbors = {}
        if not self._tree_ids:
            self._tree = None
            return
        coords = np.array([self.active[i].coords for i in self._tree_ids])
        self._tree = cKDTree(coords)
        n = len(self._tree_ids)
        if n < 2:
            self._neighbors = {self._tree_ids[0]: set()}
            return
        k = self.knn_count()
        count = min(k + 1, n)
        _, idxs = self._tree.query(coords, k=count)
        idxs = np.atleast_2d(idxs)
        neighbors: dict[int, set[int]] = {i: set() for i in self._tree_ids}
        for row, sid in enumerate(self._tree_ids):
            taken = 0
            for col in idxs[row]:
                nid = self._tree_ids[int(col)]
                if nid == sid:
                    continue
                # connect both ways: the RGG edge exists when either endpoint
                # is among the other's k nearest
                neighbors[sid].add(nid)
                neighbors[nid].add(sid)
                taken += 1
                if taken >= k:
                    break
        self._neighbors = neighbors

    def insert_active(self, states: Iterable[State]) -> None:
        for s in states:
            self.active[s.id] = s
        self._rebuild_index()

    def knn_count(self) -> int:
        return rgg_knn_count(len(self.active), self.scenario.dim, self.config.eta)

    def nearest_other_distance(self, x: State) -> float:
        """Distance from x to the closest active vertex other than itself."""
        if self._tree is None or len(self.active) < 2:
            return math.inf
        dists, idxs = self._tree.query(x.coords, k=min(2, len(self._tree_ids)))
        dists = np.atleast_1d(dists)
        idxs = np.atleast_1d(idxs)
        for d, i in zip(dists, idxs):
            if self._tree_ids[i] != x.id:
                return float(d)
        return math.inf

    def expand(self, x: State) -> list[tuple[State, State]]:
        """Candidate edges out of x: its symmetric k-NN neighbours plus every
        previously validated partner still active, minus known-invalid edges."""
        if x.id not in self.active:
            raise KeyError(f"expand() on inactive state {x.id}")
        candidates = set(self._neighbors.get(x.id, ()))
        for sid in self.valid_partners.get(x.id, ()):
            if sid in self.active:
                candidates.add(sid)
        out = []
        for sid in sorted(candidates):
            key = (x.id, sid) if x.id < sid else (sid, x.id)
            if key not in self.e_invalid:
                out.append((x, self.active[sid]))
        return out

    # ------------------------------------------------------------------
    # per-query lifecycle
    # ------------------------------------------------------------------

    def rewind_for_query(self, start: State, goals: Iterable[State]) -> list[State]:
        """Reset the approximation for a new query.

        The buffer cursor rewinds to the first sample, the active set becomes
        start + goals + kept past starts/goals + the first batch, and the
        k-NN index is rebuilt. Registries are untouched.
        """
        self.buffer.reset_cursor()
        self.active = {start.id: start}
        for g in goals:
            self.active[g.id] = g
        for s in self.keep_buffer.values():
            self.active[s.id] = s
        batch, _ = self.refine_approximation(math.inf, self.config.m)
        for s in batch:
            self.active[s.id] = s
        self._rebuild_index()
        return batch

    def refine_approximation(self, c_best: float, m: int,
                             f_hat: Optional[Callable[[State], float]] = None
                             ) -> tuple[list[State], bool]:
        """Pull the next m useful states from the buffer, sampling fresh ones
        past its end.

        A state is useful if its total-cost estimate f_hat can beat c_best;
        with c_best infinite everything is accepted. The cursor advances past
        every inspected state. Returns (states, saturated) where saturated
        flags an early return: the call inspects at most 100*m states and
        appends at most m fresh samples, so a nearly empty informed set
        cannot livelock a call or balloon the buffer.
        """
        batch: list[State] = []
        inspected = 0
        appended = 0
        cap = self.INSPECTION_FACTOR * m
        buf = self.buffer
        while len(batch) < m and inspected < cap:
            if buf.cursor >= len(buf.states):
                if appended >= m:
                    break
                buf.states.append(self._sample_valid_uniform())
                appended += 1
            x = buf.states[buf.cursor]
            buf.cursor += 1
            inspected += 1
            if c_best == math.inf or f_hat is None or f_hat(x) < c_best:
                batch.append(x)
        return batch, len(batch) < m

    def finish_query_prune(self, start: State, goals: Iterable[State]) -> list[State]:
        """Keep a finished query's start/goals only if reconnecting them later
        would be expensive: effort to the nearest other active vertex above
        the prune threshold."""
        kept = []
        r = self.scenario.resolution
        for s in [start, *goals]:
            d = self.nearest_other_distance(s)
            if d == math.inf:
                effort = math.inf
            else:
                effort = int(math.ceil(d / r)) + 1
            if effort > self.config.prune_threshold and s.id not in self.keep_buffer:
                self.keep_buffer[s.id] = s
                kept.append(s)
        return kept

    def reset_persistent(self) -> None:
        """Drop all cross-query state (single-query planner behaviour)."""
        self.buffer = SampleBuffer()
        self.e_valid.clear()
        self.e_invalid.clear()
        self.sparse_certified.clear()
        self.valid_partners.clear()
        self.keep_buffer.clear()
        self._edges.clear()
        self._interned.clear()
        self.active = {}
        self._tree = None
        self._tree_ids = []
        self._neighbors = {}
        self._pool = np.empty((0, self.scenario.dim))
        self._pool_index = 0

    # ------------------------------------------------------------------
    # snapshotting (debug / replay tests)
    # ------------------------------------------------------------------

    def snapshot(self) -> dict:
        states = {}
        for s in self.buffer.states:
            states[s.id] = s.coords.tolist()
        for s in self.keep_buffer.values():
            states[s.id] = s.coords.tolist()
        return {
            "buffer": [s.coords.tolist() for s in self.buffer.states],
            "valid": [list(k) for k in sorted(self.e_valid)],
            "invalid": [list(k) for k in sorted(self.e_invalid)],
            "keep": sorted(self.keep_buffer.keys()),
            "states": {str(i): c for i, c in states.items()},
            "buffer_ids": [s.id for s in self.buffer.states],
            "sparse": {f"{a},{b}": c for (a, b), c in sorted(self.sparse_certified.items())},
        }

    def restore(self, snap: dict) -> None:
        self.reset_persistent()
        states = {int(i): np.asarray(c, dtype=float) for i, c in snap["states"].items()}
        by_id: dict[int, State] = {}
        for sid, coords in states.items():
            st = State(sid, coords)
            by_id[sid] = st
            self._interned[np.ascontiguousarray(coords).tobytes()] = st
        self.buffer.states = [by_id[i] for i in snap["buffer_ids"]]
        self.buffer.reset_cursor()
        for a, b in snap["valid"]:
            self.e_valid.add((a, b))
            self.valid_partners.setdefault(a, set()).add(b)
            self.valid_partners.setdefault(b, set()).add(a)
        for a, b in snap["invalid"]:
            self.e_invalid.add((a, b))
        for key, c in snap.get("sparse", {}).items():
            a, b = key.split(",")
            self.sparse_certified[(int(a), int(b))] = c
        for sid in snap["keep"]:
            self.keep_buffer[sid] = by_id[sid]
        if states:
            self._ids = itertools.count(max(states) + 1)
