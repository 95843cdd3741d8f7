"""Median aggregation with distribution-free confidence intervals.

Per (planner, query) the metrics are summarized by the median over runs,
with unsolved runs participating as infinity, and a nonparametric confidence
interval for the median from binomial order statistics. Cumulative medians
sum the per-query medians; an infinite per-query median (planner failing
more than half the runs) makes the cumulative value infinite.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .runner import BenchmarkSpec, Row, rows_to_csv

_METRICS = ("t_init", "c_init", "c_final")


def median_ci_ranks(n: int, confidence: float = 0.99) -> tuple[int, int]:
    """1-based order-statistic ranks (lo, hi) covering the median.

    The interval [x_(lo), x_(hi)] with hi = n+1-lo has coverage
    1 - 2*P(B <= lo-1) for B ~ Binomial(n, 1/2); this picks the narrowest
    such pair meeting the confidence, degenerating to the full range when
    n is too small for it.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    half_alpha = (Fraction(1) - Fraction(str(confidence))) / 2
    scale = 2 ** n
    cumulative = 0
    j_max = -1   # largest j with cdf(j) <= alpha/2
    for j in range(n + 1):
        cumulative += math.comb(n, j)
        if Fraction(cumulative, scale) <= half_alpha:
            j_max = j
        else:
            break
    lo = max(1, j_max + 1)
    lo = min(lo, (n + 1) // 2) if n > 1 else 1
    hi = n + 1 - lo
    return lo, hi


def median_with_ci(values: list[float], confidence: float = 0.99
                   ) -> tuple[float, float, float]:
    """(median, ci_lo, ci_hi) with infinities kept as order statistics."""
    arr = np.sort(np.asarray(values, dtype=float))
    med = float(np.median(arr))
    lo, hi = median_ci_ranks(len(arr), confidence)
    return med, float(arr[lo - 1]), float(arr[hi - 1])


@dataclass
class QuerySummary:
    query: int
    n_runs: int
    success_rate: float
    t_init: tuple[float, float, float]
    c_init: tuple[float, float, float]
    c_final: tuple[float, float, float]


def aggregate(rows: list[Row], confidence: float = 0.99) -> dict:
    """Per-planner per-query medians/CIs plus cumulative medians."""
    planners: dict[str, dict[int, list[Row]]] = {}
    for row in rows:
        planners.setdefault(row.planner, {}).setdefault(row.query, []).append(row)
    out: dict = {}
    for planner, by_query in sorted(planners.items()):
        summaries = []
        cumulative = {metric: 0.0 for metric in _METRICS}
        for query in sorted(by_query):
            cell = by_query[query]
            stats = {}
            for metric in _METRICS:
                values = [getattr(r, metric) for r in cell]
                stats[metric] = median_with_ci(values, confidence)
            for metric in _METRICS:
                cumulative[metric] += stats[metric][0]
            summaries.append(QuerySummary(
                query=query, n_runs=len(cell),
                success_rate=sum(r.solved for r in cell) / len(cell),
                t_init=stats["t_init"], c_init=stats["c_init"],
                c_final=stats["c_final"]))
        out[planner] = {
            "per_query": summaries,
            "cumulative": dict(cumulative),
        }
    return out


def _json_safe(value):
    if isinstance(value, float):
        return "inf" if value == math.inf else value
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def emit_outputs(rows: list[Row], summary: dict, out_dir: str | Path,
                 spec: BenchmarkSpec, query_hash: str, code_version: str) -> dict:
    """Write results.csv, summary.json and plotdata/<planner>.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(rows_to_csv(rows))

    doc = {
        "spec": _json_safe(asdict(spec)),
        "query_sequence_sha256": query_hash,
        "code_version": code_version,
        "planners": {},
    }
    plot_dir = out / "plotdata"
    plot_dir.mkdir(exist_ok=True)
    for planner, agg in summary.items():
        doc["planners"][planner] = {
            "cumulative": _json_safe(agg["cumulative"]),
            "per_query": [_json_safe(asdict(s)) for s in agg["per_query"]],
        }
        lines = ["query,success_rate,"
                 "t_init_median,t_init_lo,t_init_hi,"
                 "c_init_median,c_init_lo,c_init_hi,"
                 "c_final_median,c_final_lo,c_final_hi"]
        for s in agg["per_query"]:
            cells = [str(s.query), repr(s.success_rate)]
            for triple in (s.t_init, s.c_init, s.c_final):
                cells.extend("inf" if v == math.inf else repr(v) for v in triple)
            lines.append(",".join(cells))
        (plot_dir / f"{planner}.csv").write_text("\n".join(lines) + "\n")
    (out / "summary.json").write_text(json.dumps(doc, indent=2))
    return doc
