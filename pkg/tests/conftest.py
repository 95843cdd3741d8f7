"""Shared fixtures and independent oracles used across the test suite.

The oracles here deliberately avoid the library's own code paths: brute-force
grid validation, argsort-based k-NN graphs, textbook Dijkstra, and a
visibility graph over obstacle corners.
"""
from __future__ import annotations

import heapq
import itertools
import math

import numpy as np
import pytest

from eirm.approximation import rgg_knn_count
from eirm.space import Scenario, State


def make_state(coords, sid=-1):
    return State(sid, np.asarray(coords, dtype=float))


def point_in_obstacle(coords, scenario):
    for obs in scenario.obstacles:
        if all(lo < c < hi for c, (lo, hi) in zip(coords, obs)):
            return True
    return False


def brute_force_edge_valid(a, b, scenario):
    """Check every grid point of an edge one by one (the reference oracle)."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    length = float(np.linalg.norm(b - a))
    n = 1 if length <= 0 else int(math.ceil(length / scenario.resolution)) + 1
    for i in range(n):
        t = i / max(n - 1, 1)
        if point_in_obstacle(a + t * (b - a), scenario):
            return False
    return True


def brute_force_grid_points(a, b, scenario):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    length = float(np.linalg.norm(b - a))
    n = 1 if length <= 0 else int(math.ceil(length / scenario.resolution)) + 1
    return [a + (i / max(n - 1, 1)) * (b - a) for i in range(n)]


def random_micro_scenario(rng, dim=None):
    """Small random world: 2-4 box obstacles in the unit cube, coarse grid."""
    dim = dim if dim is not None else int(rng.integers(2, 5))
    obstacles = []
    for _ in range(int(rng.integers(2, 5))):
        lo = rng.uniform(0.05, 0.7, dim)
        hi = lo + rng.uniform(0.05, 0.25, dim)
        obstacles.append(np.stack([lo, np.minimum(hi, 0.95)], axis=1))
    return Scenario(dim=dim, bounds=np.tile([0.0, 1.0], (dim, 1)),
                    obstacles=obstacles, resolution=0.02)


def random_free_coords(rng, scenario):
    while True:
        c = rng.uniform(scenario.bounds[:, 0], scenario.bounds[:, 1])
        if not point_in_obstacle(c, scenario):
            return c


def symmetric_knn_adjacency(coords_by_id, dim, eta):
    ids = sorted(coords_by_id)
    k = rgg_knn_count(len(ids), dim, eta)
    arr = np.array([coords_by_id[i] for i in ids])
    adj = {i: set() for i in ids}
    for row, i in enumerate(ids):
        dists = np.linalg.norm(arr - arr[row], axis=1)
        taken = 0
        for j in np.argsort(dists):
            if ids[j] == i:
                continue
            adj[i].add(ids[j])
            adj[ids[j]].add(i)
            taken += 1
            if taken >= k:
                break
    return adj


def dijkstra(adjacency, weight, source, target):
    """Textbook shortest path; weight(u, v) returns the edge cost."""
    dist = {source: 0.0}
    frontier = [(0.0, source)]
    done = set()
    while frontier:
        g, u = heapq.heappop(frontier)
        if u in done:
            continue
        done.add(u)
        if u == target:
            return g
        for v in adjacency[u]:
            ng = g + weight(u, v)
            if ng < dist.get(v, math.inf):
                dist[v] = ng
                heapq.heappush(frontier, (ng, v))
    return math.inf


def _segment_blocked(a, b, obstacle):
    """True if segment a-b passes through the obstacle interior (2D)."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    d = b - a
    t0, t1 = 0.0, 1.0
    for axis in range(2):
        lo, hi = obstacle[axis]
        if abs(d[axis]) < 1e-15:
            if not (lo <= a[axis] <= hi):
                return False
        else:
            ta = (lo - a[axis]) / d[axis]
            tb = (hi - a[axis]) / d[axis]
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
            if t0 > t1:
                return False
    if t1 - t0 <= 1e-12:
        return False
    mid = a + 0.5 * (t0 + t1) * d
    return all(lo < m < hi for m, (lo, hi) in zip(mid, obstacle))


def visibility_graph_optimum(start, goal, scenario):
    """Exact 2D shortest path over obstacle corners (closure semantics)."""
    assert scenario.dim == 2
    nodes = [np.asarray(start, float), np.asarray(goal, float)]
    for obs in scenario.obstacles:
        for cx in obs[0]:
            for cy in obs[1]:
                corner = np.array([cx, cy])
                if np.all(corner >= scenario.bounds[:, 0]) and \
                        np.all(corner <= scenario.bounds[:, 1]):
                    nodes.append(corner)
    n = len(nodes)
    adj = {i: set() for i in range(n)}
    for i, j in itertools.combinations(range(n), 2):
        if not any(_segment_blocked(nodes[i], nodes[j], obs)
                   for obs in scenario.obstacles):
            adj[i].add(j)
            adj[j].add(i)
    return dijkstra(adj, lambda u, v: float(np.linalg.norm(nodes[u] - nodes[v])),
                    0, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
