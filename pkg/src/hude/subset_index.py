"""Probe-subset index: random ell-subsets mapped to the supports containing them.

Preprocessing samples L probe sets of ell distinct elements and stores, for
each probe, the bucket of all dataset indices whose support contains it.  A
query scans probes in order until one is contained in the observed sample
set, then resolves the matching bucket, either by certifying candidates with
random sample elements ("uj-certify") or by running elimination restricted
to the bucket ("bucket-eliminate", the practical default).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Dataset, OpCounter, QueryMultiset
from .elimination import CandidateSet, eliminate
from .rng import keyed_uniform, mix64, stream_key

VARIANT_BUCKET_ELIMINATE = "bucket-eliminate"
VARIANT_UJ_CERTIFY = "uj-certify"
_VARIANTS = (VARIANT_BUCKET_ELIMINATE, VARIANT_UJ_CERTIFY)


@dataclass(frozen=True)
class IndexParams:
    """Knobs of the index: probe count L, probe size ell, certify constant."""

    num_probes: int
    probe_size: int
    c_query: float = 4.0
    variant: str = VARIANT_BUCKET_ELIMINATE

    def __post_init__(self) -> None:
        if self.num_probes < 1:
            raise ValueError("need at least one probe")
        if self.probe_size < 0:
            raise ValueError("probe size cannot be negative")
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown query variant {self.variant!r}")


@dataclass(frozen=True)
class QueryResult:
    outcome: str  # "found" | "not_found"
    index: int | None = None

    @property
    def found(self) -> bool:
        return self.outcome == "found"


def sample_probes(seed: int, count: int, size: int, n: int) -> np.ndarray:
    """(count, size) probe matrix, each row a uniform size-subset of [0, n).

    Row i is a pure function of (seed, i) — Floyd's sampling driven by a
    per-probe splitmix64 key — so the result is independent of how probes
    might be partitioned across workers.
    """
    if size > n:
        raise ValueError("probe size cannot exceed the domain size")
    if size == 0:
        return np.zeros((count, 0), dtype=np.int64)
    base = np.uint64(stream_key(seed, "probes"))
    keys = mix64(base + np.arange(count, dtype=np.uint64))
    selected = np.empty((count, size), dtype=np.int64)
    for r in range(size):
        j = n - size + r
        draw = (keyed_uniform(keys, r) * (j + 1)).astype(np.int64)
        duplicate = np.zeros(count, dtype=bool)
        for c in range(r):
            duplicate |= selected[:, c] == draw
        selected[:, r] = np.where(duplicate, j, draw)
    return selected


class SubsetIndex:
    """Preprocessing output: probe sets with their candidate buckets."""

    __slots__ = ("probes", "buckets", "params", "dataset", "seed", "_probe_map")

    def __init__(
        self,
        probes: np.ndarray,
        buckets: list[np.ndarray],
        params: IndexParams,
        dataset: Dataset,
        seed: int,
    ):
        self.probes = probes
        self.buckets = buckets
        self.params = params
        self.dataset = dataset
        self.seed = seed
        self._probe_map: dict[tuple[int, ...], np.ndarray] | None = None

    @property
    def probe_map(self) -> dict[tuple[int, ...], np.ndarray]:
        """Dictionary view: sorted probe tuple -> bucket (practical-variant lookup)."""
        if self._probe_map is None:
            mapping: dict[tuple[int, ...], np.ndarray] = {}
            for i in range(self.probes.shape[0]):
                key = tuple(sorted(self.probes[i].tolist()))
                mapping.setdefault(key, self.buckets[i])
            self._probe_map = mapping
        return self._probe_map

    def __repr__(self) -> str:
        return (
            f"SubsetIndex(L={self.probes.shape[0]}, ell={self.probes.shape[1]}, "
            f"k={self.dataset.k})"
        )


def preprocess(data: Dataset, params: IndexParams, seed: int) -> SubsetIndex:
    """Sample probes and materialize their buckets over the dataset."""
    if params.probe_size > data.n:
        raise ValueError("probe size cannot exceed the domain size")
    probes = sample_probes(seed, params.num_probes, params.probe_size, data.n)
    matrix = data.matrix
    buckets: list[np.ndarray] = []
    everyone = np.arange(data.k, dtype=np.int32)
    for i in range(params.num_probes):
        row = probes[i]
        if row.size == 0:
            buckets.append(everyone)
            continue
        mask = matrix[:, row[0]].copy()
        for e in row[1:]:
            mask &= matrix[:, e]
        buckets.append(np.flatnonzero(mask).astype(np.int32))
    return SubsetIndex(probes, buckets, params, data, seed)


def _probe_scan_plan(index: SubsetIndex, query: QueryMultiset) -> tuple[np.ndarray, np.ndarray]:
    """Hit mask and cumulative op cost of the in-order, short-circuit probe scan.

    Probe elements are tested left to right and the scan of one probe stops
    at its first element outside the sample set, so probe i costs
    1 + [e1 in Q] + [e1 in Q][e2 in Q] + ... membership tests.
    """
    probes = index.probes
    count, size = probes.shape
    if size == 0:
        return np.ones(count, dtype=bool), np.zeros(count, dtype=np.int64)
    member = query.distinct.bits[probes]
    tests = np.ones(count, dtype=np.int64)
    running = member[:, 0].copy()
    for r in range(1, size):
        tests += running
        running &= member[:, r]
    return running, np.cumsum(tests)


def _certify_candidate(
    data: Dataset,
    j: int,
    pool: np.ndarray,
    cap: int,
    counter: OpCounter,
    rng: np.random.Generator,
) -> bool:
    """Sample distinct query elements one at a time until a miss or cap accepts."""
    take = min(cap, pool.size)
    order = rng.permutation(pool)[:take]
    inside = data.matrix[j, order]
    misses = np.flatnonzero(~inside)
    if misses.size:
        counter.add(int(misses[0]) + 1)
        return False
    counter.add(take)
    return True


def query(
    index: SubsetIndex,
    q: QueryMultiset,
    epsilon: float,
    counter: OpCounter,
    rng: np.random.Generator | None = None,
    variant: str | None = None,
) -> QueryResult:
    """Scan probes in order; resolve the first contained probe's bucket.

    If a bucket fails to produce an answer the scan continues with the next
    contained probe.  All probe-element and candidate-element tests are
    charged to ``counter``.
    """
    variant = variant or index.params.variant
    if variant not in _VARIANTS:
        raise ValueError(f"unknown query variant {variant!r}")
    if variant == VARIANT_UJ_CERTIFY and rng is None:
        raise ValueError("uj-certify needs an rng for candidate sampling")
    data = index.dataset
    hits, cumulative = _probe_scan_plan(index, q)
    charged = 0
    cap = max(1, math.ceil(index.params.c_query * math.log(data.n) / epsilon))
    pool = q.distinct.indices
    for i in np.flatnonzero(hits).tolist():
        if cumulative.size:
            counter.add(int(cumulative[i]) - charged)
            charged = int(cumulative[i])
        bucket = index.buckets[i]
        if bucket.size == 0:
            continue
        if variant == VARIANT_BUCKET_ELIMINATE:
            result = eliminate(
                data, CandidateSet(bucket.tolist(), origin="bucket"), q, counter
            )
            if result.outcome == "found":
                return QueryResult("found", result.index)
        else:
            for j in bucket.tolist():
                if _certify_candidate(data, j, pool, cap, counter, rng):
                    return QueryResult("found", j)
    if cumulative.size:
        counter.add(int(cumulative[-1]) - charged)
    return QueryResult("not_found")


@dataclass(frozen=True)
class TheoreticalChoice:
    """Parameter rule output: index params plus the predicted query exponent."""

    params: IndexParams
    predicted_rho_q: float
    clamped: bool
    base: float  # 2 / (1 - e^{-2/s})


def theoretical_params(
    rho_u: float,
    s: float,
    k: int,
    epsilon: float,
    c: float = 5.0,
    c_query: float = 4.0,
    variant: str = VARIANT_UJ_CERTIFY,
) -> TheoreticalChoice:
    """Probe count and size realizing a target space exponent.

    The probe count is L = ceil(c * k^rho_u) and the probe size solves
    L = c * base^ell for base = 2/(1 - e^{-2/s}), floored to an integer and
    clamped to at least 1 (``clamped`` flags the degenerate case).  The
    predicted query exponent is 1 + rho_u * log(1 - epsilon/2) / log(base).
    """
    if rho_u < 0:
        raise ValueError("space exponent must be nonnegative")
    if s < 2:
        raise ValueError("sample-ratio parameter must be at least 2")
    if k < 2:
        raise ValueError("need at least two distributions")
    if not 0 < epsilon <= 2:
        raise ValueError("separation must be in (0, 2]")
    base = 2.0 / -math.expm1(-2.0 / s)
    ell_exact = rho_u * math.log(k) / math.log(base)
    clamped = ell_exact < 1.0
    ell = max(1, math.floor(ell_exact))
    # base**ell_exact == k**rho_u by construction; the direct form is exact
    # when k**rho_u is (ceil would otherwise pick up float noise).
    num_probes = math.ceil(c * k**rho_u)
    if epsilon == 2.0:
        predicted = 0.0  # log(1 - eps/2) diverges; clamp the exponent at zero
    else:
        predicted = max(0.0, 1.0 + rho_u * math.log1p(-epsilon / 2.0) / math.log(base))
    return TheoreticalChoice(
        IndexParams(num_probes, ell, c_query=c_query, variant=variant),
        predicted,
        clamped,
        base,
    )


def dump_index(index: SubsetIndex) -> str:
    """Debug rendering: '# param' headers then 'probe: ... | bucket: ...' lines."""
    lines = [
        f"# L={index.probes.shape[0]} ell={index.probes.shape[1]} "
        f"c_query={index.params.c_query} variant={index.params.variant} seed={index.seed}"
    ]
    for i in range(index.probes.shape[0]):
        probe = " ".join(str(e) for e in index.probes[i].tolist())
        bucket = " ".join(str(j) for j in index.buckets[i].tolist())
        lines.append(f"probe: {probe} | bucket: {bucket}")
    return "\n".join(lines) + "\n"
