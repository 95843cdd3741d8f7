"""Multiquery sampling-based path planning.

The primary planner replays a persistent sample buffer to rewind its graph
approximation at every query, keeps all edge-validation knowledge across
queries, and orders its search by remaining validation effort until a
solution exists, then by cost. RRT-Connect and LazyPRM* baselines share the
result contract, and the bench subpackage reproduces the multiquery
benchmark protocol.
"""

__version__ = "0.1.0"

from .approximation import Approximation, BatchConfig, SampleBuffer, SampleStarvation
from .baselines import BaselineConfig, LazyPrmStarSession, lazy_prm_star, rrt_connect
from .planner import (Budget, PlanResult, PlannerConfig, Query, QueryRejected,
                      Session, configure, create_session, extract_path,
                      plan_query, solve_sequence)
from .search import CheckCounters, EdgeQueue, TwoPhaseSearch
from .space import (Edge, Scenario, State, ValidationStatus, check_edge_full,
                    check_edge_sparse, edge_cost, edge_effort_estimate,
                    is_state_valid)

__all__ = [
    "__version__",
    "Approximation", "BatchConfig", "SampleBuffer", "SampleStarvation",
    "BaselineConfig", "LazyPrmStarSession", "lazy_prm_star", "rrt_connect",
    "Budget", "PlanResult", "PlannerConfig", "Query", "QueryRejected",
    "Session", "configure", "create_session", "extract_path", "plan_query",
    "solve_sequence",
    "CheckCounters", "EdgeQueue", "TwoPhaseSearch",
    "Edge", "Scenario", "State", "ValidationStatus", "check_edge_full",
    "check_edge_sparse", "edge_cost", "edge_effort_estimate", "is_state_valid",
]
