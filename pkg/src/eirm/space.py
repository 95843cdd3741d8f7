"""Continuous search spaces with axis-aligned box obstacles.

States live in a bounded subset of R^n. Obstacles are closed hyperrectangles;
a point collides only if it is strictly inside one, so obstacle faces belong
to the free space. Edge validation walks an evenly spaced grid of check
points along the segment, and every function here reports exactly how many
point evaluations it performed: that count is the planner's unit of effort.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# Points per vectorized collision block. Bounds the wasted work when an edge
# turns out to be invalid early.
_CHUNK = 16384


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class State:
    """A configuration with a stable integer identity."""

    id: int
    coords: np.ndarray

    def __eq__(self, other):
        return isinstance(other, State) and other.id == self.id

    def __hash__(self):
        return self.id

    def __repr__(self):
        return f"State({self.id}, {np.array2string(self.coords, precision=4)})"


@dataclass
class Scenario:
    """Bounded axis-aligned world with box obstacles and a check resolution.

    resolution is the maximum spacing between collision-check points along an
    edge, in workspace units.
    """

    dim: int
    bounds: np.ndarray              # (dim, 2) rows of [lo, hi]
    obstacles: list = field(default_factory=list)   # each (dim, 2)
    resolution: float = 0.01

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.bounds.shape != (self.dim, 2):
            raise ValueError(f"bounds must be ({self.dim}, 2), got {self.bounds.shape}")
        if not np.all(self.bounds[:, 0] < self.bounds[:, 1]):
            raise ValueError("bounds must satisfy lo < hi on every axis")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        obstacles = []
        for obs in self.obstacles:
            obs = np.asarray(obs, dtype=float)
            if obs.shape != (self.dim, 2):
                raise ValueError(f"obstacle must be ({self.dim}, 2), got {obs.shape}")
            if not np.all(obs[:, 0] < obs[:, 1]):
                raise ValueError("obstacle must satisfy lo < hi on every axis")
            overlap_lo = np.maximum(obs[:, 0], self.bounds[:, 0])
            overlap_hi = np.minimum(obs[:, 1], self.bounds[:, 1])
            if not np.all(overlap_lo < overlap_hi):
                raise ValueError("obstacle does not intersect the scenario bounds")
            obstacles.append(obs)
        self.obstacles = obstacles

    def contains(self, coords: np.ndarray) -> bool:
        return bool(np.all(coords >= self.bounds[:, 0]) and np.all(coords <= self.bounds[:, 1]))

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim": self.dim,
                "bounds": self.bounds.tolist(),
                "obstacles": [o.tolist() for o in self.obstacles],
                "resolution": self.resolution,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        data = json.loads(text)
        return cls(
            dim=int(data["dim"]),
            bounds=np.asarray(data["bounds"], dtype=float),
            obstacles=[np.asarray(o, dtype=float) for o in data["obstacles"]],
            resolution=float(data["resolution"]),
        )


@dataclass(frozen=True)
class ValidationStatus:
    """Validation knowledge about one edge.

    kind is one of "unknown", "sparse", "valid", "invalid". For "sparse",
    certified counts how many of the edge's full-resolution check points have
    already passed.
    """

    kind: str
    certified: int = 0


UNKNOWN = ValidationStatus("unknown")
VALID = ValidationStatus("valid")
INVALID = ValidationStatus("invalid")


def sparse_valid(certified: int) -> ValidationStatus:
    return ValidationStatus("sparse", certified)


@dataclass(frozen=True, eq=False)
class Edge:
    """Unordered edge between two states, canonicalized as a.id < b.id."""

    a: State
    b: State
    length: float

    @classmethod
    def between(cls, x: State, y: State) -> "Edge":
        if x.id == y.id:
            raise ValueError("self-loop edge")
        if x.id > y.id:
            x, y = y, x
        return cls(x, y, math.dist(x.coords, y.coords))

    @property
    def key(self) -> tuple:
        return (self.a.id, self.b.id)

    def __eq__(self, other):
        return isinstance(other, Edge) and other.key == self.key

    def __hash__(self):
        return hash(self.key)


def edge_cost(x: State, y: State) -> float:
    """Euclidean distance between two states."""
    if x.coords.shape != y.coords.shape:
        raise DimensionMismatch("states have different dimensions")
    return math.dist(x.coords, y.coords)


def is_state_valid(x: State, s: Scenario) -> bool:
    """A state is valid unless it lies strictly inside an obstacle."""
    c = x.coords
    if c.shape != (s.dim,):
        raise DimensionMismatch(f"state has dim {c.shape}, scenario has dim {s.dim}")
    for obs in s.obstacles:
        if np.all(c > obs[:, 0]) and np.all(c < obs[:, 1]):
            return False
    return True


def points_free(points: np.ndarray, s: Scenario) -> np.ndarray:
    """Vectorized validity test: free iff not strictly inside any obstacle."""
    free = np.ones(len(points), dtype=bool)
    for obs in s.obstacles:
        inside = np.all((points > obs[:, 0]) & (points < obs[:, 1]), axis=1)
        free &= ~inside
    return free


def full_grid_size(length: float, resolution: float) -> int:
    """Number of evenly spaced check points (endpoints included) for an edge."""
    if length <= 0.0:
        return 1
    return int(math.ceil(length / resolution)) + 1


def sparse_grid_size(length: float, resolution: float, sparse_factor: int) -> int:
    if length <= 0.0:
        return 1
    return int(math.ceil(length / (sparse_factor * resolution))) + 1


def sparse_grid_indices(n_full: int, n_sparse: int) -> np.ndarray:
    """Indices of the sparse check points on the full-resolution grid.

    The sparse points are a subset of the full grid so that each one counts
    as a certified full-resolution point. n_sparse <= n_full keeps the
    rounded indices strictly increasing, hence all distinct.
    """
    if n_full == 1:
        return np.array([0], dtype=np.int64)
    m = min(n_sparse, n_full)
    return np.rint(np.linspace(0, n_full - 1, m)).astype(np.int64)


def _evaluate_grid_points(edge: Edge, s: Scenario, indices: np.ndarray,
                          n_full: int) -> tuple[int, bool]:
    """Check the given grid points in ascending order.

    Returns (points actually evaluated, all free). Stops at the first
    colliding point; the count includes it.
    """
    a = edge.a.coords
    delta = edge.b.coords - a
    denom = max(n_full - 1, 1)
    done = 0
    for lo in range(0, len(indices), _CHUNK):
        block = indices[lo:lo + _CHUNK]
        t = block / denom
        pts = a + t[:, None] * delta
        bad = np.nonzero(~points_free(pts, s))[0]
        if len(bad):
            return done + int(bad[0]) + 1, False
        done += len(block)
    return done, True


def check_edge_full(edge: Edge, s: Scenario,
                    already_checked: ValidationStatus = UNKNOWN
                    ) -> tuple[ValidationStatus, int]:
    """Validate an edge at full resolution, skipping certified points.

    Evaluates the check points of the full grid not yet certified by
    already_checked. Returns (Valid, n) if all pass, (Invalid, k) at the
    first failure; the integer counts point evaluations performed this call.
    """
    if already_checked.kind == "valid":
        return VALID, 0
    if already_checked.kind == "invalid":
        return INVALID, 0
    n = full_grid_size(edge.length, s.resolution)
    if already_checked.kind == "sparse" and already_checked.certified > 0:
        certified = sparse_grid_indices(n, already_checked.certified)
        mask = np.ones(n, dtype=bool)
        mask[certified] = False
        remaining = np.nonzero(mask)[0]
    else:
        remaining = np.arange(n, dtype=np.int64)
    performed, ok = _evaluate_grid_points(edge, s, remaining, n)
    return (VALID, performed) if ok else (INVALID, performed)


def check_edge_sparse(edge: Edge, s: Scenario, status: ValidationStatus,
                      sparse_factor: int) -> tuple[ValidationStatus, int]:
    """Validate an edge coarsely on a subset of the full-resolution grid.

    A sparse collision is a true collision, so a failure returns Invalid.
    A pass returns SparseValid with the cumulative count of distinct
    full-resolution points certified. Re-running an already-certified level
    performs no work.
    """
    if sparse_factor < 1:
        raise ValueError("sparse_factor must be >= 1")
    if status.kind == "valid":
        return VALID, 0
    if status.kind == "invalid":
        return INVALID, 0
    n = full_grid_size(edge.length, s.resolution)
    indices = sparse_grid_indices(n, sparse_grid_size(edge.length, s.resolution, sparse_factor))
    if status.kind == "sparse" and status.certified >= len(indices):
        return status, 0
    performed, ok = _evaluate_grid_points(edge, s, indices, n)
    if not ok:
        return INVALID, performed
    return sparse_valid(len(indices)), performed


def edge_effort_estimate(edge: Edge, status: ValidationStatus, resolution: float) -> int:
    """Remaining check points needed to fully validate an edge.

    Zero for validated edges. Must not be asked about invalid edges; they are
    excluded from every candidate set before effort is evaluated.
    """
    if status.kind == "valid":
        return 0
    if status.kind == "invalid":
        raise ValueError("effort queried for an invalid edge")
    n = full_grid_size(edge.length, resolution)
    return max(n - status.certified, 0)
