"""Acceptance criteria, one test per criterion.

Each test prints a single PASS line with its measured numbers when the
criterion holds; pytest failure marks the criterion red. The oracles come
from conftest and are independent of the library code paths they check.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from eirm import (Budget, EdgeQueue, PlannerConfig, Query, Session, State,
                  space)
from eirm.baselines import LazyPrmStarSession
from eirm.bench import (BenchmarkSpec, aggregate, build_scenario,
                        run_benchmark, rows_to_csv)
from eirm.space import Scenario

from conftest import (brute_force_edge_valid, dijkstra, make_state,
                      random_free_coords, random_micro_scenario,
                      symmetric_knn_adjacency, visibility_graph_optimum)


def _report(criterion, detail):
    print(f"\n[PASS] criterion {criterion}: {detail}")


def empty_scenario(dim=2, resolution=0.05):
    return Scenario(dim=dim, bounds=np.tile([0.0, 1.0], (dim, 1)),
                    resolution=resolution)


def test_criterion_1_frozen_graph_optimality():
    """Exhausted single-batch search equals textbook shortest path, 1e-9."""
    t0 = time.perf_counter()
    checked = 0
    worst = 0.0
    for seed in range(50):
        scenario = empty_scenario()
        config = PlannerConfig(m=60, seed=seed, sparse_factor=10, max_batches=1)
        session = Session(scenario, config)
        rng = np.random.default_rng(10_000 + seed)
        q = Query(start=make_state(rng.uniform(0, 1, 2)),
                  goals=(make_state(rng.uniform(0, 1, 2)),),
                  budget=Budget(iterations=500_000))
        result = session.plan_query(q)
        coords = {i: s.coords for i, s in session.approx.active.items()}
        start = session.approx.intern_state(q.start.coords)
        goal = session.approx.intern_state(q.goals[0].coords)
        adjacency = symmetric_knn_adjacency(coords, 2, config.eta)
        optimal = dijkstra(
            adjacency,
            lambda u, v: math.dist(coords[u], coords[v]),
            start.id, goal.id)
        if optimal == math.inf:
            assert not result.solved
            continue
        assert result.solved, f"seed {seed}: oracle found a path, planner did not"
        gap = abs(result.c_final - optimal)
        assert gap <= 1e-9, f"seed {seed}: {result.c_final} vs oracle {optimal}"
        worst = max(worst, gap)
        checked += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(1, f"{checked}/50 solvable seeds exact vs Dijkstra oracle "
               f"(worst gap {worst:.2e}), {elapsed:.1f}s")


def test_criterion_2_path_soundness_property_suite():
    """1,000 random micro-worlds: returned paths re-validate independently."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(424242)
    solved = 0
    for i in range(1000):
        scenario = random_micro_scenario(rng)
        start = random_free_coords(rng, scenario)
        goal = random_free_coords(rng, scenario)
        session = Session(scenario, PlannerConfig(m=24, seed=i, sparse_factor=4))
        q = Query(start=make_state(start), goals=(make_state(goal),),
                  budget=Budget(iterations=260))
        result = session.plan_query(q)
        if not result.solved:
            continue
        solved += 1
        for a, b in zip(result.path, result.path[1:]):
            assert brute_force_edge_valid(a.coords, b.coords, scenario), \
                f"scenario {i}: path edge fails independent re-validation"
        total = sum(math.dist(a.coords, b.coords)
                    for a, b in zip(result.path, result.path[1:]))
        assert abs(total - result.c_final) <= 1e-12 * max(1.0, result.c_final)
    elapsed = time.perf_counter() - t0
    assert solved >= 500, f"only {solved}/1000 solved; suite not representative"
    assert elapsed < 120.0
    _report(2, f"{solved}/1000 returned paths re-validated at full resolution, "
               f"{elapsed:.1f}s")


def test_criterion_3_reuse_on_repeats():
    """Repeating one query: later connection effort under 10% of query 1."""
    t0 = time.perf_counter()
    scenario = build_scenario("wall_gap", 2)
    session = Session(scenario, PlannerConfig(seed=11))
    q = Query(start=make_state([-0.4, -0.2]), goals=(make_state([0.4, 0.3]),),
              budget=Budget(seconds=0.5))
    results = [session.plan_query(q, initial_only=True) for _ in range(5)]
    assert all(r.solved for r in results)
    first = results[0].full_checks
    later = [r.full_checks for r in results[1:]]
    assert first > 0
    for i, checks in enumerate(later, start=2):
        assert checks < 0.1 * first, \
            f"query {i}: {checks} full-check evaluations vs query 1's {first}"
    seq = [first] + later
    assert all(b <= a for a, b in zip(seq, seq[1:])), "not non-increasing"
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(3, f"full checks per query {seq} "
               f"(queries 2-5 all under 10% of query 1), {elapsed:.1f}s")


def test_criterion_4_multiquery_trend_vs_lazy_prm_star():
    """Cumulative median initial-solution time at most half the baseline's."""
    t0 = time.perf_counter()
    spec = BenchmarkSpec(scenario_name="repeating_rectangles", dim=4,
                         query_mode="subregion", n_queries=20, n_runs=25,
                         budget_seconds=0.5,
                         planners=("eirm", "lazyprmstar"), master_seed=7)
    rows = run_benchmark(spec)
    summary = aggregate(rows)
    ours = summary["eirm"]["cumulative"]["t_init"]
    baseline = summary["lazyprmstar"]["cumulative"]["t_init"]
    assert ours < math.inf, "planner failed more than half the runs somewhere"
    assert ours <= 0.5 * baseline, \
        f"cumulative median t_init {ours:.2f}s vs baseline {baseline:.2f}s"
    elapsed = time.perf_counter() - t0
    assert elapsed < 600.0
    baseline_str = "inf" if baseline == math.inf else f"{baseline:.2f}s"
    _report(4, f"cumulative median t_init {ours:.2f}s vs LazyPRM* "
               f"{baseline_str} (bar: half), {elapsed:.0f}s")


def test_criterion_5_rewind_bound():
    """Graph size at the initial solution never exceeds the rewind inventory."""
    t0 = time.perf_counter()
    scenario = build_scenario("wall_gap", 2, resolution=0.002)
    session = Session(scenario, PlannerConfig(m=50, seed=21, sparse_factor=20))
    rng = np.random.default_rng(77)
    for qi in range(50):
        start = [rng.uniform(-0.45, -0.15), rng.uniform(-0.45, 0.45)]
        goal = [rng.uniform(0.15, 0.45), rng.uniform(-0.45, 0.45)]
        q = Query(start=make_state(start), goals=(make_state(goal),),
                  budget=Budget(iterations=20_000))
        r = session.plan_query(q, initial_only=True)
        bound = (session.config.m * max(r.batches_at_init, 1)
                 + r.keep_buffer_size + 1 + 1)
        assert r.graph_size_at_init <= bound, \
            f"query {qi}: {r.graph_size_at_init} > bound {bound}"

    # always-prune threshold: nothing is ever kept, the initial graph size
    # is constant in the query index
    always_prune = Session(empty_scenario(dim=2, resolution=0.01),
                           PlannerConfig(m=50, seed=22, sparse_factor=10,
                                         prune_threshold=10**15))
    sizes = set()
    for qi in range(50):
        q = Query(start=make_state(rng.uniform(0.05, 0.95, 2)),
                  goals=(make_state(rng.uniform(0.05, 0.95, 2)),),
                  budget=Budget(iterations=20_000))
        r = always_prune.plan_query(q, initial_only=True)
        assert r.solved and r.batches_at_init == 1
        assert r.keep_buffer_size == 0
        sizes.add(r.graph_size_at_init)
    assert len(sizes) == 1, f"graph size varied: {sorted(sizes)}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    _report(5, f"bound held over 50 queries; always-prune size constant at "
               f"{sizes.pop()}, {elapsed:.1f}s")


def test_criterion_6_informed_refinement():
    """Post-solution batches only contain states inside the informed set."""
    t0 = time.perf_counter()
    scenario = build_scenario("wall_gap", 2, resolution=0.001)
    session = Session(scenario, PlannerConfig(m=50, seed=31, sparse_factor=20))
    rng = np.random.default_rng(88)
    checked = 0
    for qi in range(10):
        start = np.array([rng.uniform(-0.45, -0.15), rng.uniform(-0.4, 0.4)])
        goal = np.array([rng.uniform(0.15, 0.45), rng.uniform(-0.4, 0.4)])
        events = []
        q = Query(start=make_state(start), goals=(make_state(goal),),
                  budget=Budget(iterations=4000))
        session.plan_query(q, on_event=events.append)
        for event in events:
            if event["type"] != "batch_added" or event["bound"] == math.inf:
                continue
            for s in event["states"]:
                f_hat = (math.dist(start, s.coords)
                         + math.dist(s.coords, goal))
                assert f_hat < event["bound"], \
                    f"query {qi}: sample outside the informed set"
                checked += 1
    elapsed = time.perf_counter() - t0
    assert checked > 0, "no informed batches were exercised"
    assert elapsed < 60.0
    _report(6, f"{checked} post-solution samples all inside the informed set, "
               f"{elapsed:.1f}s")


def test_criterion_7_anytime_convergence_wall_gap():
    """Median final cost within 5% of the visibility-graph optimum."""
    t0 = time.perf_counter()
    scenario = build_scenario("wall_gap", 2)
    start = np.array([-0.4, -0.35])
    goal = np.array([0.4, 0.35])
    optimum = visibility_graph_optimum(start, goal, scenario)
    assert optimum < math.inf
    finals = []
    for seed in range(25):
        session = Session(scenario, PlannerConfig(seed=seed))
        q = Query(start=make_state(start), goals=(make_state(goal),),
                  budget=Budget(seconds=2.0))
        finals.append(session.plan_query(q).c_final)
    median = float(np.median(finals))
    assert median >= optimum - 1e-9
    assert median <= 1.05 * optimum, \
        f"median {median:.4f} vs optimum {optimum:.4f}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 180.0
    _report(7, f"median c_final {median:.4f} vs oracle optimum {optimum:.4f} "
               f"({100 * (median / optimum - 1):.1f}% above), {elapsed:.0f}s")


def test_criterion_8_benchmark_determinism():
    """Two executions with one master seed: byte-identical results.csv."""
    t0 = time.perf_counter()
    spec = BenchmarkSpec(scenario_name="wall_gap", dim=2,
                         query_mode="subregion", n_queries=6, n_runs=3,
                         budget_iterations=3000,
                         planners=("eirm", "lazyprmstar", "rrtconnect"),
                         master_seed=13)
    first = rows_to_csv(run_benchmark(spec, threads=1))
    second = rows_to_csv(run_benchmark(spec, threads=2))
    assert first == second, "results.csv differs between executions"
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    _report(8, f"{len(first.splitlines()) - 1} rows byte-identical across "
               f"serial and parallel executions, {elapsed:.0f}s")


def test_criterion_9_key_and_queue_unit_properties():
    """Comparator agreement, monotone pops, zero-effort edges first."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(5150)
    # lexicographic comparator agreement on random key pairs
    for _ in range(100_000):
        a = (int(rng.integers(0, 500)), float(rng.uniform(0, 10)))
        b = (int(rng.integers(0, 500)), float(rng.uniform(0, 10)))
        heap_order = (a[0], a[1]) < (b[0], b[1])
        direct = a < b
        assert heap_order == direct

    # effort-phase pop sequence has non-decreasing first key elements
    keys = {}
    queue = EdgeQueue(("effort",), lambda e: (keys[(e[0].id, e[1].id)],))
    states = [make_state([i, 0.0], i) for i in range(3000)]
    for i in range(2999):
        keys[(i, i + 1)] = (int(rng.integers(0, 100_000)),
                            float(rng.uniform(0, 1)))
        queue.push((states[i], states[i + 1]))
    previous = None
    pops = 0
    while len(queue):
        edge = queue.pop("effort")
        first = keys[(edge[0].id, edge[1].id)][0]
        assert previous is None or first >= previous
        previous = first
        pops += 1

    # zero-effort (validated) edges sort strictly before positive effort
    # at equal tie elements
    tie = 7.25
    keys2 = {0: (0, tie), 1: (1, tie), 2: (250_000, tie)}
    queue2 = EdgeQueue(("effort",), lambda e: (keys2[e[0].id],))
    for i in (2, 1, 0):
        queue2.push((states[i], states[i + 1]))
    order = [queue2.pop("effort")[0].id for _ in range(3)]
    assert order == [0, 1, 2]
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(9, f"10^5 comparator pairs agree; {pops} pops monotone; "
               f"validated-first ordering holds, {elapsed:.1f}s")


def test_criterion_10_baseline_growth_contrast():
    """The lazy baseline's roadmap only grows; ours stays rewind-bounded."""
    t0 = time.perf_counter()
    scenario = build_scenario("wall_gap", 2, resolution=0.002)
    rng = np.random.default_rng(99)
    queries = []
    for _ in range(20):
        start = [rng.uniform(-0.45, -0.15), rng.uniform(-0.45, 0.45)]
        goal = [rng.uniform(0.15, 0.45), rng.uniform(-0.45, 0.45)]
        queries.append(Query(start=make_state(start),
                             goals=(make_state(goal),),
                             budget=Budget(iterations=2500)))
    lazy = LazyPrmStarSession(scenario, rng=np.random.default_rng(1))
    lazy.solve_sequence(queries)
    sizes = lazy.vertex_history
    assert len(sizes) == 20
    assert all(b >= a for a, b in zip(sizes, sizes[1:])), \
        "lazy roadmap shrank between queries"
    assert sizes[-1] > sizes[0], "lazy roadmap never grew"

    session = Session(scenario, PlannerConfig(m=50, seed=41, sparse_factor=20))
    graph_sizes = []
    for q in queries:
        r = session.plan_query(q, initial_only=True)
        bound = (session.config.m * max(r.batches_at_init, 1)
                 + r.keep_buffer_size + 1 + 1)
        assert r.graph_size_at_init <= bound
        graph_sizes.append(r.graph_size_at_init)
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    _report(10, f"lazy roadmap grew {sizes[0]} -> {sizes[-1]} vertices; "
                f"rewound graph stayed within {max(graph_sizes)}, {elapsed:.0f}s")
