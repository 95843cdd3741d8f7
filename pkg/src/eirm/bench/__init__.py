from .aggregate import aggregate, emit_outputs, median_ci_ranks, median_with_ci
from .queries import generate_queries, queries_for, sequence_hash
from .runner import (BenchmarkSpec, PLANNER_NAMES, Row, derive_seed,
                     run_benchmark, rows_to_csv, shared_query_hash)
from .scenarios import (DEFAULT_BUDGETS, RESOLUTION, SCENARIO_NAMES,
                        SUPPORTED_DIMS, build_scenario, export_scenarios,
                        query_boxes)

__all__ = [
    "aggregate", "emit_outputs", "median_ci_ranks", "median_with_ci",
    "generate_queries", "queries_for", "sequence_hash",
    "BenchmarkSpec", "PLANNER_NAMES", "Row", "derive_seed", "run_benchmark",
    "rows_to_csv", "shared_query_hash",
    "DEFAULT_BUDGETS", "RESOLUTION", "SCENARIO_NAMES", "SUPPORTED_DIMS",
    "build_scenario", "export_scenarios", "query_boxes",
]
