"""Asymmetric bidirectional search over the active roadmap.

A cheap reverse pass sparse-checks edges outward from the goals and computes
per-vertex labels: an admissible cost-to-go lower bound, a looser cost-to-go
estimate, and the remaining validation effort-to-go. Until the query has a
solution the reverse queue is ordered by effort, afterwards by cost. The
forward pass consumes the labels, fully validates edges, and selects them
explicit-estimation style: cheapest remaining effort among the candidates
whose estimated total cost stays within the inflated lower bound.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import space
from .approximation import Approximation
from .space import Scenario, State

INF = math.inf


@dataclass
class CheckCounters:
    """Per-query effort accounting: collision-check point evaluations."""

    full_evals: int = 0
    sparse_evals: int = 0
    relaxations: int = 0


class EdgeQueue:
    """Set of directed candidate edges with one binary heap per ordering.

    A single bundle callable produces the key tuple of every ordering at
    once, so shared terms (edge status, lengths) are looked up once per push.
    Entries are versioned: pushing an edge that is already queued supersedes
    its older heap tuples, which are discarded when they surface (lazy
    deletion). Surfaced tuples are verified against freshly computed keys; a
    tuple whose stored key went stale without a rekey is reinserted with the
    current key rather than processed.
    """

    def __init__(self, names: tuple[str, ...], key_bundle: Callable):
        self._names = names
        self._slot = {name: i for i, name in enumerate(names)}
        self._key_bundle = key_bundle
        self._heaps: dict[str, list] = {name: [] for name in names}
        self._live: dict[tuple[int, int], int] = {}
        self._edges: dict[tuple[int, int], tuple[State, State]] = {}
        self._by_target: dict[int, set] = {}
        self._by_source: dict[int, set] = {}
        self._versions = itertools.count()

    def __len__(self):
        return len(self._live)

    def __contains__(self, pair: tuple[int, int]):
        return pair in self._live

    def edges(self) -> list[tuple[State, State]]:
        return [self._edges[p] for p in self._live]

    def clear(self):
        for heap in self._heaps.values():
            heap.clear()
        self._live.clear()
        self._edges.clear()
        self._by_target.clear()
        self._by_source.clear()

    def push(self, edge: tuple[State, State]) -> None:
        xs, xt = edge
        pair = (xs.id, xt.id)
        version = next(self._versions)
        self._live[pair] = version
        self._edges[pair] = edge
        self._by_target.setdefault(xt.id, set()).add(pair)
        self._by_source.setdefault(xs.id, set()).add(pair)
        bundle = self._key_bundle(edge)
        for name in self._names:
            k1, k2 = bundle[self._slot[name]]
            heapq.heappush(self._heaps[name], (k1, k2, pair[0], pair[1], version))

    def push_many(self, edges) -> None:
        for edge in edges:
            self.push(edge)

    def rekey_target(self, vid: int) -> None:
        """Refresh every queued edge pointing at vid (its labels changed)."""
        for pair in list(self._by_target.get(vid, ())):
            if pair in self._live:
                self.push(self._edges[pair])

    def rekey_source(self, vid: int) -> None:
        """Refresh every queued edge leaving vid (its cost-to-come changed)."""
        for pair in list(self._by_source.get(vid, ())):
            if pair in self._live:
                self.push(self._edges[pair])

    def rekey_pair(self, a: int, b: int) -> None:
        """Refresh both orientations of an edge (its status changed)."""
        for pair in ((a, b), (b, a)):
            if pair in self._live:
                self.push(self._edges[pair])

    def discard_pair(self, a: int, b: int) -> None:
        for pair in ((a, b), (b, a)):
            if pair in self._live:
                self._drop(pair)

    def _drop(self, pair: tuple[int, int]) -> None:
        del self._live[pair]
        self._by_target.get(pair[1], set()).discard(pair)
        self._by_source.get(pair[0], set()).discard(pair)
        self._edges.pop(pair, None)

    def _surface(self, name: str):
        """Drop dead and stale tuples until the head of `name` is current."""
        heap = self._heaps[name]
        slot = self._slot[name]
        while heap:
            k1, k2, a, b, version = heap[0]
            pair = (a, b)
            if self._live.get(pair) != version:
                heapq.heappop(heap)
                continue
            fresh = self._key_bundle(self._edges[pair])[slot]
            if fresh[0] != k1 or fresh[1] != k2:
                heapq.heappop(heap)
                self.push(self._edges[pair])
                continue
            return k1, k2, pair
        return None

    def peek_key(self, name: str):
        head = self._surface(name)
        return None if head is None else (head[0], head[1])

    def pop(self, name: str):
        head = self._surface(name)
        if head is None:
            return None
        pair = head[2]
        edge = self._edges[pair]
        heapq.heappop(self._heaps[name])
        self._drop(pair)
        return edge

    def pop_where(self, name: str, admits: Callable) -> Optional[tuple[State, State]]:
        """Pop the minimal entry under `name` whose edge satisfies admits().

        Live entries that fail the predicate are kept. Returns None when no
        queued edge is admitted.
        """
        heap = self._heaps[name]
        stash = []
        found = None
        while heap:
            head = self._surface(name)
            if head is None:
                break
            pair = head[2]
            edge = self._edges[pair]
            if admits(edge):
                heapq.heappop(heap)
                self._drop(pair)
                found = edge
                break
            stash.append(heapq.heappop(heap))
        for item in stash:
            heapq.heappush(heap, item)
        return found


class TwoPhaseSearch:
    """Reverse label computation and forward validation for one query."""

    def __init__(self, approx: Approximation, config, counters: CheckCounters,
                 start: State, goals: tuple[State, ...]):
        self.approx = approx
        self.scenario = approx.scenario
        self.config = config
        self.counters = counters
        self.start = start
        self.goals = goals
        self.goal_ids = {g.id for g in goals}
        self.w = INF
        self.c_curr = INF
        # vertex labels; missing means +inf
        self.cost_to_go_lb: dict[int, float] = {}    # admissible, from reverse pass
        self.cost_to_go_est: dict[int, float] = {}   # inadmissible companion
        self.effort_to_go: dict[int, float] = {}
        self.cost_to_come: dict[int, float] = {start.id: 0.0}
        self.parent: dict[int, int] = {}
        self.children: dict[int, set[int]] = {}
        self.tree_states: dict[int, State] = {start.id: start}
        self._start_dist: dict[int, float] = {}
        self._d_bar = config.d_bar if config.d_bar is not None else (lambda x: 0)
        self.q_r = EdgeQueue(("effort", "cost"), self._reverse_bundle)
        self.q_f = EdgeQueue(("effort", "adm", "inadm"), self._forward_bundle)

    # ------------------------------------------------------------------
    # heuristic terms
    # ------------------------------------------------------------------

    def _edge_length(self, xs: State, xt: State) -> float:
        return self.approx.edge(xs, xt).length

    def cost_from_start(self, x: State) -> float:
        d = self._start_dist.get(x.id)
        if d is None:
            d = space.edge_cost(self.start, x) if x.id != self.start.id else 0.0
            self._start_dist[x.id] = d
        return d

    def _remaining_effort(self, xs: State, xt: State) -> float:
        status = self.approx.edge_status(xs.id, xt.id)
        if status.kind == "invalid":
            return INF
        return space.edge_effort_estimate(
            self.approx.edge(xs, xt), status, self.scenario.resolution)

    # ------------------------------------------------------------------
    # queue keys
    # ------------------------------------------------------------------

    def _reverse_bundle(self, edge) -> tuple:
        """Keys of both reverse orderings: effort-first and its transpose."""
        xs, xt = edge
        effort = (self.effort_to_go.get(xs.id, INF)
                  + self._remaining_effort(xs, xt) + self._d_bar(xt))
        cost = (self.cost_to_go_lb.get(xs.id, INF)
                + self._edge_length(xs, xt) + self.cost_from_start(xt))
        return ((effort, cost), (cost, effort))

    def _forward_bundle(self, edge) -> tuple:
        """Keys of the forward orderings: effort-first, admissible cost, and
        inadmissible cost, sharing one status lookup."""
        xs, xt = edge
        length = self._edge_length(xs, xt)
        g = self.cost_to_come.get(xs.id, INF)
        effort = self._remaining_effort(xs, xt) + self.effort_to_go.get(xt.id, INF)
        adm = g + length + self.cost_to_go_lb.get(xt.id, INF)
        inadm = g + length + self.cost_to_go_est.get(xt.id, INF)
        return ((effort, adm), (adm, effort), (inadm, effort))

    def reverse_key_effort(self, edge) -> tuple:
        return self._reverse_bundle(edge)[0]

    def reverse_key_cost(self, edge) -> tuple:
        return self._reverse_bundle(edge)[1]

    def forward_key_effort(self, edge) -> tuple:
        return self._forward_bundle(edge)[0]

    def forward_key_cost(self, edge) -> tuple:
        return self._forward_bundle(edge)[1]

    def _inadmissible_total(self, edge) -> float:
        return self._forward_bundle(edge)[2][0]

    # ------------------------------------------------------------------
    # bookkeeping shared by both passes
    # ------------------------------------------------------------------

    def _record(self, edge: space.Edge, status: space.ValidationStatus) -> None:
        self.approx.record_edge_status(edge, status)
        a, b = edge.key
        if status.kind == "invalid":
            self.q_r.discard_pair(a, b)
            self.q_f.discard_pair(a, b)
        else:
            self.q_r.rekey_pair(a, b)
            self.q_f.rekey_pair(a, b)

    def restart_reverse(self) -> None:
        """Reset the reverse labels and rebuild both queues.

        Called at query start, after a forward full check fails, and after a
        new batch: the labels must be recomputed without the lost edge / with
        the new vertices. The forward tree is kept; its vertices are all
        re-expanded so the forward frontier survives the queue rebuild.
        """
        self.cost_to_go_lb = {g: 0.0 for g in self.goal_ids}
        self.cost_to_go_est = {g: 0.0 for g in self.goal_ids}
        self.effort_to_go = {g: 0 for g in self.goal_ids}
        self.q_r.clear()
        self.q_f.clear()
        for g in self.goals:
            self.q_r.push_many(self.approx.expand(g))
        for x in self.tree_states.values():
            self.q_f.push_many(self.approx.expand(x))

    # ------------------------------------------------------------------
    # phase gates
    # ------------------------------------------------------------------

    def best_rev_edge_improves_sol(self) -> bool:
        """Run the reverse pass while its best edge beats the forward queue's
        best under the phase ordering (effort before a solution, else cost)."""
        if self.w == INF:
            kr = self.q_r.peek_key("effort")
            kf = self.q_f.peek_key("effort")
        else:
            kr = self.q_r.peek_key("cost")
            kf = self.q_f.peek_key("adm")
        if kr is None:
            return False
        if kf is None:
            return True
        return kr < kf

    def forward_can_improve(self) -> bool:
        return self.lower_bound_s_hat() < self.c_curr

    def lower_bound_s_hat(self) -> float:
        """Admissible lower bound on the best solution in the current graph."""
        key = self.q_f.peek_key("adm")
        return INF if key is None else key[0]

    def estimate_s_bar(self) -> float:
        """Possibly tighter, inadmissible estimate of the same bound."""
        key = self.q_f.peek_key("inadm")
        return INF if key is None else key[0]

    # ------------------------------------------------------------------
    # reverse pass
    # ------------------------------------------------------------------

    def reverse_iterate(self) -> None:
        ordering = "effort" if self.w == INF else "cost"
        edge = self.q_r.pop(ordering)
        if edge is None:
            return
        xs, xt = edge
        status = self.approx.edge_status(xs.id, xt.id)
        if status.kind == "invalid":
            return
        e = self.approx.edge(xs, xt)
        result, n = space.check_edge_sparse(e, self.scenario, status,
                                            self.config.sparse_factor)
        self.counters.sparse_evals += n
        if result.kind == "invalid":
            self._record(e, space.INVALID)
            return
        if result.kind == "sparse" and result.certified != status.certified:
            self._record(e, result)
        est = self.cost_to_go_est.get(xs.id, INF) + self._edge_length(xs, xt)
        if est < self.cost_to_go_est.get(xt.id, INF):
            self.cost_to_go_est[xt.id] = est
            self.q_f.rekey_target(xt.id)
        remaining = self._remaining_effort(xs, xt)
        if self.w == INF:
            improves = (self.effort_to_go.get(xs.id, INF) + remaining
                        < self.effort_to_go.get(xt.id, INF))
        else:
            improves = (self.cost_to_go_lb.get(xs.id, INF) + self._edge_length(xs, xt)
                        < self.cost_to_go_lb.get(xt.id, INF))
        if improves:
            lb = self.cost_to_go_lb.get(xs.id, INF) + self._edge_length(xs, xt)
            if lb < self.cost_to_go_lb.get(xt.id, INF):
                self.cost_to_go_lb[xt.id] = lb
            eff = self.effort_to_go.get(xs.id, INF) + remaining
            if eff < self.effort_to_go.get(xt.id, INF):
                self.effort_to_go[xt.id] = eff
            self.q_f.rekey_target(xt.id)
            self.q_r.push_many(self.approx.expand(xt))

    # ------------------------------------------------------------------
    # forward pass
    # ------------------------------------------------------------------

    def get_best_forward_edge(self) -> Optional[tuple[State, State]]:
        """AEES-style selection: cheapest remaining effort among edges whose
        inadmissible total stays within w times the admissible lower bound,
        else the best inadmissible edge if that still meets the bound, else
        the best admissible edge."""
        s_hat = self.lower_bound_s_hat()
        if self.w == INF or s_hat == INF:
            threshold = INF
        else:
            threshold = self.w * s_hat
        edge = self.q_f.pop_where(
            "effort", lambda e: self._inadmissible_total(e) <= threshold)
        if edge is not None:
            return edge
        if self.estimate_s_bar() <= threshold:
            return self.q_f.pop("inadm")
        return self.q_f.pop("adm")

    def forward_iterate(self) -> Optional[str]:
        """Validate one forward edge. Returns "solution" when the incumbent
        improved, "collision" when the edge failed (the reverse pass must be
        restarted), "advanced" otherwise, None on an empty queue."""
        edge = self.get_best_forward_edge()
        if edge is None:
            return None
        xs, xt = edge
        status = self.approx.edge_status(xs.id, xt.id)
        if status.kind == "invalid":
            return "advanced"
        e = self.approx.edge(xs, xt)
        result, n = space.check_edge_full(e, self.scenario, status)
        self.counters.full_evals += n
        if result.kind == "invalid":
            self._record(e, space.INVALID)
            return "collision"
        if status.kind != "valid":
            self._record(e, space.VALID)
        event = "advanced"
        if (self.cost_to_come.get(xs.id, INF) + self._edge_length(xs, xt)
                + self.cost_to_go_lb.get(xt.id, INF) < self.c_curr):
            new_cost = self.cost_to_come.get(xs.id, INF) + e.length
            if new_cost < self.cost_to_come.get(xt.id, INF):
                self._relax(xs, xt, new_cost)
                self.counters.relaxations += 1
                self.q_f.push_many(self.approx.expand(xt))
                best = min(self.cost_to_come.get(g, INF) for g in self.goal_ids)
                if best < self.c_curr:
                    self.c_curr = best
                    self.w = self.config.w_after_solution
                    event = "solution"
        return event

    def _relax(self, xs: State, xt: State, new_cost: float) -> None:
        """Rewire xt under xs and propagate the improvement to xt's subtree,
        so cost-to-come always equals the tree chain cost."""
        old_cost = self.cost_to_come.get(xt.id, INF)
        old_parent = self.parent.get(xt.id)
        if old_parent is not None:
            self.children.get(old_parent, set()).discard(xt.id)
        self.cost_to_come[xt.id] = new_cost
        self.parent[xt.id] = xs.id
        self.children.setdefault(xs.id, set()).add(xt.id)
        self.tree_states[xt.id] = xt
        if old_cost != INF:
            delta = old_cost - new_cost
            stack = list(self.children.get(xt.id, ()))
            while stack:
                node = stack.pop()
                self.cost_to_come[node] -= delta
                self.q_f.rekey_source(node)
                stack.extend(self.children.get(node, ()))

    # ------------------------------------------------------------------
    # solution extraction
    # ------------------------------------------------------------------

    def best_goal(self) -> Optional[State]:
        best, best_cost = None, INF
        for g in self.goals:
            c = self.cost_to_come.get(g.id, INF)
            if c < best_cost:
                best, best_cost = g, c
        return best

    def extract_path(self, goal: State) -> list[State]:
        """Walk the forward tree from a reached goal back to the start."""
        if self.cost_to_come.get(goal.id, INF) == INF:
            raise ValueError("goal was not reached")
        path = [goal]
        total = 0.0
        node = goal
        while node.id != self.start.id:
            pid = self.parent.get(node.id)
            if pid is None:
                raise RuntimeError("broken parent chain in forward tree")
            prev = self.tree_states[pid]
            if self.approx.edge_status(prev.id, node.id).kind != "valid":
                raise RuntimeError("forward tree contains a non-validated edge")
            total += self.approx.edge(prev, node).length
            node = prev
            path.append(node)
        expected = self.cost_to_come[goal.id]
        if abs(total - expected) > 1e-12 * max(1.0, abs(expected)):
            raise RuntimeError(
                f"path cost audit failed: {total} vs label {expected}")
        path.reverse()
        return path
