"""Reference benchmark scenarios.

Both scenarios live in the unit hypercube [-0.5, 0.5]^n with box obstacles
defined on the first one or two axes and extruded over the rest. The exact
coordinates here are the reference instances; `export_scenarios` publishes
them as JSON for other tools.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..space import Scenario

RESOLUTION = 5e-6
SCENARIO_NAMES = ("wall_gap", "repeating_rectangles")
SUPPORTED_DIMS = (2, 4, 8)

# Per-dimension default query budgets (seconds) from the reference setup.
DEFAULT_BUDGETS = {2: 0.5, 4: 2.0, 8: 2.0}


def _full(dim: int, axis_intervals: dict[int, tuple[float, float]]) -> np.ndarray:
    """Box spanning the bounds except on the given axes."""
    box = np.tile([-0.5, 0.5], (dim, 1)).astype(float)
    for axis, (lo, hi) in axis_intervals.items():
        box[axis] = (lo, hi)
    return box


def build_scenario(name: str, dim: int, resolution: float = RESOLUTION) -> Scenario:
    """Construct a reference scenario.

    wall_gap: one wall across the first axis with a single 0.04-wide gap.
    repeating_rectangles: four blocks tiling the central band of the first
    two axes, leaving a cross of passages plus a free outer ring.
    """
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}")
    if dim < 2:
        raise ValueError("scenarios need dim >= 2")
    bounds = np.tile([-0.5, 0.5], (dim, 1)).astype(float)
    if name == "wall_gap":
        obstacles = [
            _full(dim, {0: (-0.1, 0.1), 1: (-0.5, 0.08)}),
            _full(dim, {0: (-0.1, 0.1), 1: (0.12, 0.5)}),
        ]
    else:
        blocks = [(-0.35, -0.05), (0.05, 0.35)]
        obstacles = [
            _full(dim, {0: b0, 1: b1}) for b0 in blocks for b1 in blocks
        ]
    scenario = Scenario(dim=dim, bounds=bounds, obstacles=obstacles,
                        resolution=resolution)
    for box in query_boxes(name, dim):
        if not box_in_free_space(box, scenario):
            raise AssertionError(f"query box of {name} intersects an obstacle")
    return scenario


def query_boxes(name: str, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Start and goal sub-boxes for the subregion query mode.

    The boxes sit left and right of the obstacle band on the first axis and
    span the full bounds elsewhere, so they are entirely in free space.
    """
    if name == "wall_gap":
        start_axis, goal_axis = (-0.45, -0.15), (0.15, 0.45)
    else:
        start_axis, goal_axis = (-0.48, -0.38), (0.38, 0.48)
    return _full(dim, {0: start_axis}), _full(dim, {0: goal_axis})


def box_in_free_space(box: np.ndarray, scenario: Scenario) -> bool:
    """True when the box has no overlap with any obstacle interior."""
    for obs in scenario.obstacles:
        lo = np.maximum(box[:, 0], obs[:, 0])
        hi = np.minimum(box[:, 1], obs[:, 1])
        if np.all(lo < hi):
            return False
    return True


def export_scenarios(out_dir: str | Path) -> list[Path]:
    """Write every (scenario, dim) reference instance as JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SCENARIO_NAMES:
        for dim in SUPPORTED_DIMS:
            scenario = build_scenario(name, dim)
            path = out / f"{name}_{dim}d.json"
            path.write_text(scenario.to_json())
            written.append(path)
    return written
