"""Benchmark harness: parameter sweeps, adaptive probe-count search, accounting.

Reproduces the identification experiments: random half-uniform datasets,
100 queries per configuration (each drawn from a uniformly chosen input
distribution), the elimination baseline over the full dataset, and the
probe-subset index with its probe count grown geometrically from a modest
start until it answers every query correctly.  Wall time is measured around
the query call only; preprocessing is never billed.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, fields

import numpy as np

from .distributions import Dataset, OpCounter, QueryMultiset, random_fixed_size_supports
from .elimination import CandidateSet, eliminate
from .rng import stream_key, substream
from .subset_index import IndexParams, preprocess, query

SWEEP_PARAMS = ("k", "n", "S", "ell")


@dataclass(frozen=True)
class ExperimentConfig:
    sweep_param: str
    sweep_values: tuple = ()
    k: int = 50000
    n: int = 500
    S: int = 50
    ell: int = 3
    queries_per_point: int = 100
    L_init: int = 200
    L_factor: float = 1.5
    L_cap: int = 10_000_000
    seed: int = 0
    variant: str = "bucket-eliminate"
    epsilon: float = 1.0  # certify-variant budget only; the data is promise-free
    c_query: float = 4.0
    scale: float = 1.0  # multiplies k; 0.2 is the desk-scale preset

    def __post_init__(self) -> None:
        if self.sweep_param not in SWEEP_PARAMS:
            raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}")
        if not self.sweep_values:
            raise ValueError("sweep needs at least one value")
        if min(self.k, self.n, self.S, self.ell, self.queries_per_point) <= 0:
            raise ValueError("all dimensions must be positive")

    def resolved_point(self, value) -> tuple[int, int, int, int]:
        """(k, n, S, ell) for one sweep value, with the desk-scale factor applied to k."""
        k, n, S, ell = self.k, self.n, self.S, self.ell
        if self.sweep_param == "k":
            k = int(value)
        elif self.sweep_param == "n":
            n = int(value)
        elif self.sweep_param == "S":
            S = int(value)
        else:
            ell = int(value)
        k = max(1, round(k * self.scale))
        if n % 2 != 0:
            raise ValueError("domain size must be even for half-uniform supports")
        return k, n, S, ell

    @classmethod
    def from_json(cls, payload: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "sweep_values" in payload:
            payload = dict(payload, sweep_values=tuple(payload["sweep_values"]))
        return cls(**payload)


@dataclass(frozen=True)
class ResultRow:
    algorithm: str  # "subset" | "elimination"
    k: int
    n: int
    S: int
    ell: int
    L: int | None  # probe count (subset only)
    accuracy: float
    mean_ops: float
    mean_time_ns: float
    seed: int


class AdaptiveSearchError(RuntimeError):
    """Probe-count search hit its cap without reaching full accuracy."""

    def __init__(self, message: str, point: dict, trace: list[tuple[int, float]]):
        super().__init__(message)
        self.point = point
        self.trace = trace


def generate_point(
    n: int, k: int, S: int, seed: int, point_id: int, num_queries: int
) -> tuple[Dataset, list[tuple[int, QueryMultiset]]]:
    """Random half-uniform dataset plus queries from uniformly chosen truths."""
    matrix = random_fixed_size_supports(k, n, n // 2, substream(seed, "bench-data", point_id))
    data = Dataset(matrix)
    truths = substream(seed, "bench-truth", point_id).integers(0, k, size=num_queries)
    queries = []
    for qid, truth in enumerate(truths.tolist()):
        sample = data.distribution(truth).sample(S, substream(seed, "bench-query", point_id, qid))
        queries.append((truth, sample))
    return data, queries


def run_elimination(
    data: Dataset, queries: list[tuple[int, QueryMultiset]]
) -> tuple[float, float, float]:
    """(accuracy, mean_ops, mean_time_ns) of the baseline over the full dataset."""
    correct = 0
    total_ops = 0
    total_ns = 0
    for truth, sample in queries:
        counter = OpCounter()
        candidates = CandidateSet.full(data.k)
        start = time.perf_counter_ns()
        result = eliminate(data, candidates, sample, counter)
        total_ns += time.perf_counter_ns() - start
        total_ops += counter.membership_ops
        if result.outcome == "found" and result.index == truth:
            correct += 1
    count = len(queries)
    return correct / count, total_ops / count, total_ns / count


def _run_subset_once(
    data: Dataset,
    queries: list[tuple[int, QueryMultiset]],
    params: IndexParams,
    epsilon: float,
    seed: int,
    point_id: int,
) -> tuple[float, float, float]:
    index = preprocess(
        data, params, stream_key(seed, "bench-preprocess", point_id, params.num_probes)
    )
    correct = 0
    total_ops = 0
    total_ns = 0
    for qid, (truth, sample) in enumerate(queries):
        counter = OpCounter()
        rng = substream(seed, "bench-certify", point_id, params.num_probes, qid)
        start = time.perf_counter_ns()
        result = query(index, sample, epsilon, counter, rng=rng)
        total_ns += time.perf_counter_ns() - start
        total_ops += counter.membership_ops
        if result.found and result.index == truth:
            correct += 1
    count = len(queries)
    return correct / count, total_ops / count, total_ns / count


def adaptive_L_search(
    data: Dataset,
    queries: list[tuple[int, QueryMultiset]],
    config: ExperimentConfig,
    ell: int,
    point_id: int = 0,
) -> tuple[int, list[tuple[int, float]], tuple[float, float, float]]:
    """Grow the probe count by L_factor from L_init until every query is correct.

    The same query instances are reused at every probe count; preprocessing
    re-randomizes probes (fresh sub-seed) at each step.  Returns the first
    fully accurate probe count, the (L, accuracy) trace, and that step's
    (accuracy, mean_ops, mean_time_ns).
    """
    trace: list[tuple[int, float]] = []
    L = config.L_init
    while L <= config.L_cap:
        params = IndexParams(L, ell, c_query=config.c_query, variant=config.variant)
        accuracy, mean_ops, mean_ns = _run_subset_once(
            data, queries, params, config.epsilon, config.seed, point_id
        )
        trace.append((L, accuracy))
        if accuracy == 1.0:
            return L, trace, (accuracy, mean_ops, mean_ns)
        L = int(np.ceil(config.L_factor * L))
    best = max((a for _, a in trace), default=0.0)
    raise AdaptiveSearchError(
        f"no probe count up to {config.L_cap} reached full accuracy (best {best:.2f})",
        {"point_id": point_id, "k": data.k, "n": data.n, "ell": ell},
        trace,
    )


def run_sweep(config: ExperimentConfig) -> list[ResultRow]:
    """Both algorithms on identical query sets at every sweep value."""
    rows: list[ResultRow] = []
    for point_id, value in enumerate(config.sweep_values):
        k, n, S, ell = config.resolved_point(value)
        data, queries = generate_point(n, k, S, config.seed, point_id, config.queries_per_point)
        accuracy, mean_ops, mean_ns = run_elimination(data, queries)
        rows.append(
            ResultRow("elimination", k, n, S, ell, None, accuracy, mean_ops, mean_ns, config.seed)
        )
        try:
            L, _, (s_acc, s_ops, s_ns) = adaptive_L_search(data, queries, config, ell, point_id)
        except AdaptiveSearchError as err:
            err.point = dict(err.point, sweep_param=config.sweep_param, sweep_value=value)
            raise
        rows.append(ResultRow("subset", k, n, S, ell, L, s_acc, s_ops, s_ns, config.seed))
    return rows


RESULT_FIELDS = (
    "algorithm",
    "k",
    "n",
    "S",
    "ell",
    "L",
    "accuracy",
    "mean_ops",
    "mean_time_ns",
    "seed",
)


def write_results_csv(rows: list[ResultRow], path, metadata: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if metadata:
            fh.write("# " + json.dumps(metadata, sort_keys=True, separators=(",", ":")) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_FIELDS)
        for r in rows:
            writer.writerow(
                [
                    r.algorithm,
                    r.k,
                    r.n,
                    r.S,
                    r.ell,
                    "" if r.L is None else r.L,
                    repr(r.accuracy),
                    repr(r.mean_ops),
                    repr(r.mean_time_ns),
                    r.seed,
                ]
            )


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if tuple(header) != RESULT_FIELDS:
        raise ValueError("unexpected results CSV header")
    for rec in reader:
        rows.append(
            ResultRow(
                rec[0],
                int(rec[1]),
                int(rec[2]),
                int(rec[3]),
                int(rec[4]),
                None if rec[5] == "" else int(rec[5]),
                float(rec[6]),
                float(rec[7]),
                float(rec[8]),
                int(rec[9]),
            )
        )
    return rows
