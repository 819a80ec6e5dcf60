"""Seeded generation of the three benchmark problem families.

* half-uniform identification instances (fixed-size supports, a promised
  L1 separation from the truth, and a fixed number of query samples),
* random-support instances (Bernoulli supports, Poisson-sized query), and
* correlated subset-search instances, together with the reduction that
  rewrites a subset-search query into a random-support query by Poissonizing
  per-element sample counts.

Generators are pure functions of (parameters, seed); every random choice is
drawn from a named sub-stream so instances are byte-identical across runs.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .distributions import (
    Dataset,
    QueryMultiset,
    SupportSet,
    random_bernoulli_supports,
    random_fixed_size_supports,
)
from .rng import substream


class GenerationError(RuntimeError):
    """Instance generation failed its post-generation validity check."""


@dataclass(frozen=True)
class HudeInstance:
    """k half-uniform distributions, a hidden truth index, and its query."""

    dataset: Dataset
    epsilon: float
    s: float
    truth_index: int
    query: QueryMultiset
    seed: int
    attempts: int = 1  # dataset resamples consumed by the separation check

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def k(self) -> int:
        return self.dataset.k


@dataclass(frozen=True)
class UrdeInstance:
    """Random Bernoulli supports with a Poisson-sized query from the truth."""

    dataset: Dataset
    w_u: float
    s: float
    truth_index: int
    query: QueryMultiset
    seed: int
    truth_resamples: int = 0

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def k(self) -> int:
        return self.dataset.k


@dataclass(frozen=True)
class GapssInstance:
    """Bernoulli dataset points plus a query drawn as a correlated subset.

    Coordinatewise, (query, truth) follows the joint law
    [[w_q, 0], [w_u - w_q, 1 - w_u]]: the query is 1 only where the truth
    is 1, so the query vector is always a subset of the truth vector.
    """

    dataset: Dataset
    w_u: float
    w_q: float
    truth_index: int
    query: SupportSet
    seed: int

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def k(self) -> int:
        return self.dataset.k


# ---------------------------------------------------------------------------
# Poisson sampling
# ---------------------------------------------------------------------------

_KNUTH_CHUNK = 8.0  # product method stays exact; additivity handles large rates


def _poisson_knuth(lam: float, rng: np.random.Generator) -> int:
    threshold = math.exp(-lam)
    count = 0
    running = 1.0
    while True:
        running *= rng.random()
        if running <= threshold:
            return count
        count += 1


def poisson(lam: float, rng: np.random.Generator) -> int:
    """Exact Poisson draw via Knuth's product method (chunked for large rates)."""
    if lam <= 0:
        raise ValueError("rate must be positive")
    total = 0
    while lam > _KNUTH_CHUNK:
        total += _poisson_knuth(_KNUTH_CHUNK, rng)
        lam -= _KNUTH_CHUNK
    return total + _poisson_knuth(lam, rng)


def poisson_plus(lam: float, rng: np.random.Generator) -> int:
    """Zero-truncated Poisson: rejection for moderate rates, inverse CDF below."""
    if lam <= 0:
        raise ValueError("rate must be positive")
    if lam >= 0.01:
        while True:
            value = poisson(lam, rng)
            if value > 0:
                return value
    # At tiny rates rejection would discard almost every draw; walk the
    # truncated pmf directly instead.
    u = rng.random()
    x = 1
    pmf = lam * math.exp(-lam) / -math.expm1(-lam)
    cumulative = pmf
    while u > cumulative:
        x += 1
        pmf *= lam / x
        cumulative += pmf
    return x


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def gen_hude(
    n: int,
    k: int,
    epsilon: float,
    s: float,
    seed: int,
    max_retries: int = 10,
) -> HudeInstance:
    """Half-uniform instance: k random size-n/2 supports plus floor(n/s) samples.

    After generation the L1 separation promise is checked against the truth
    index only; on a violation the whole dataset is resampled, up to
    ``max_retries`` times.
    """
    if n <= 0 or n % 2 != 0:
        raise ValueError("domain size must be positive and even")
    if k <= 0:
        raise ValueError("need at least one distribution")
    if not 0 < epsilon <= 2:
        raise ValueError("separation must be in (0, 2]")
    if s <= 0 or n / s < 1:
        raise ValueError("need n/s >= 1 query samples")

    m_query = int(n // s)
    half = n // 2
    worst: tuple[int, int, float] | None = None
    for attempt in range(max_retries + 1):
        matrix = random_fixed_size_supports(k, n, half, substream(seed, "hude-dataset", attempt))
        truth = int(substream(seed, "hude-truth", attempt).integers(0, k))
        # Equal-size supports: ||p_t - p_j||_1 = 2 - 4*|intersection|/n.
        overlap = matrix[:, matrix[truth]].sum(axis=1)
        dist = 2.0 - 4.0 * overlap / n
        dist[truth] = np.inf
        j = int(np.argmin(dist))
        if k == 1 or dist[j] >= epsilon:
            dataset = Dataset(matrix)
            query = dataset.distribution(truth).sample(
                m_query, substream(seed, "hude-query", attempt)
            )
            return HudeInstance(dataset, float(epsilon), float(s), truth, query, seed, attempt + 1)
        worst = (truth, j, float(dist[j]))
    truth, j, d = worst  # type: ignore[misc]
    raise GenerationError(
        f"separation promise failed after {max_retries} retries: "
        f"||p_{truth} - p_{j}||_1 = {d:.6f} < epsilon = {epsilon}"
    )


def gen_urde(n: int, k: int, w_u: float, s: float, seed: int) -> UrdeInstance:
    """Random-support instance with a Poisson(|supp(truth)|/(s*w_u)) query."""
    if n <= 0 or k <= 0:
        raise ValueError("domain size and dataset size must be positive")
    if not 0 < w_u <= 1:
        raise ValueError("inclusion probability must be in (0, 1]")
    if s <= 0:
        raise ValueError("sample-ratio parameter must be positive")

    matrix = random_bernoulli_supports(k, n, w_u, substream(seed, "urde-dataset"))
    truth = int(substream(seed, "urde-truth").integers(0, k))
    resamples = 0
    while not matrix[truth].any():
        # Probability 2^-n event; perturb only the truth row.
        matrix[truth] = random_bernoulli_supports(
            1, n, w_u, substream(seed, "urde-resample", resamples)
        )[0]
        resamples += 1
    dataset = Dataset(matrix)
    card = dataset.support(truth).cardinality
    total = poisson(card / (s * w_u), substream(seed, "urde-querysize"))
    query = dataset.distribution(truth).sample(total, substream(seed, "urde-query"))
    return UrdeInstance(dataset, float(w_u), float(s), truth, query, seed, resamples)


def gen_gapss(n: int, k: int, w_u: float, w_q: float, seed: int) -> GapssInstance:
    """Correlated subset-search instance with coordinatewise joint sampling."""
    if n <= 0 or k <= 0:
        raise ValueError("domain size and dataset size must be positive")
    if not 0 < w_q < w_u < 1:
        raise ValueError("parameters must satisfy 0 < w_q < w_u < 1")

    matrix = random_bernoulli_supports(k, n, w_u, substream(seed, "gapss-dataset"))
    truth = int(substream(seed, "gapss-truth").integers(0, k))
    # Conditioned on the truth coordinate being 1, the query coordinate is 1
    # with probability w_q / w_u; where the truth is 0 the query is 0.
    q = np.zeros(n, dtype=bool)
    ones = np.flatnonzero(matrix[truth])
    if ones.size:
        keep = substream(seed, "gapss-query").random(ones.size) < (w_q / w_u)
        q[ones[keep]] = True
    return GapssInstance(Dataset(matrix), float(w_u), float(w_q), truth, SupportSet(q), seed)


# ---------------------------------------------------------------------------
# Reduction: subset-search query -> random-support query
# ---------------------------------------------------------------------------


def required_w_q(w_u: float, s: float) -> float:
    """Query density that makes the reduction exact: w_u * (1 - e^{-1/(s*w_u)})."""
    return w_u * -math.expm1(-1.0 / (s * w_u))


def implied_s(w_u: float, w_q: float) -> float:
    """Inverse of :func:`required_w_q`: s = -1 / (w_u * log(1 - w_q/w_u))."""
    return -1.0 / (w_u * math.log1p(-w_q / w_u))


def reduce_gapss_to_urde(
    g: GapssInstance,
    s: float,
    seed: int,
    rel_tol: float = 1e-9,
) -> UrdeInstance:
    """Turn a subset-search instance into a random-support instance.

    Each dataset vector becomes a uniform distribution on its 1-coordinates.
    Every query coordinate that is 1 contributes a zero-truncated
    Poisson(1/(s*w_u)) number of copies to the output sample multiset, so the
    per-element appearance counts are exactly Poisson(1/(s*w_u)).
    """
    need = required_w_q(g.w_u, s)
    if abs(g.w_q - need) > rel_tol * max(abs(need), abs(g.w_q)):
        raise ValueError(
            f"parameter relation violated: instance w_q = {g.w_q!r} but the "
            f"reduction at s = {s!r} requires w_q = {need!r}"
        )
    lam = 1.0 / (s * g.w_u)
    rng_counts = substream(seed, "reduction-counts")
    q_elements = g.query.indices
    copies = np.asarray(
        [poisson_plus(lam, rng_counts) for _ in range(q_elements.size)], dtype=np.int64
    )
    draws = np.repeat(q_elements, copies)
    if draws.size:
        draws = draws[substream(seed, "reduction-order").permutation(draws.size)]
    query = QueryMultiset.from_draws(g.n, draws)
    return UrdeInstance(g.dataset, g.w_u, float(s), g.truth_index, query, seed)


# ---------------------------------------------------------------------------
# Instance files: the dataset text format plus a JSON sidecar
# ---------------------------------------------------------------------------

DATASET_FILENAME = "dataset.txt"
SIDECAR_FILENAME = "instance.json"

_FORMAT_VERSION = 1


def _sidecar_dict(instance) -> dict:
    from . import __version__

    common = {
        "format": "hude-instance",
        "version": _FORMAT_VERSION,
        "library_version": __version__,
        "n": instance.n,
        "k": instance.k,
        "seed": instance.seed,
        "truth_index": instance.truth_index,
    }
    if isinstance(instance, HudeInstance):
        common.update(
            problem="hude",
            epsilon=instance.epsilon,
            s=instance.s,
            attempts=instance.attempts,
            query=[[e, c] for e, c in instance.query.pairs()],
            query_stream=instance.query.order.tolist(),
        )
    elif isinstance(instance, UrdeInstance):
        common.update(
            problem="urde",
            w_u=instance.w_u,
            s=instance.s,
            truth_resamples=instance.truth_resamples,
            query=[[e, c] for e, c in instance.query.pairs()],
            query_stream=instance.query.order.tolist(),
        )
    elif isinstance(instance, GapssInstance):
        common.update(
            problem="gapss",
            w_u=instance.w_u,
            w_q=instance.w_q,
            query=[[int(e), 1] for e in instance.query.indices.tolist()],
        )
    else:
        raise TypeError(f"not an instance type: {type(instance)!r}")
    return common


def save_instance(instance, outdir) -> None:
    """Write dataset.txt plus instance.json into ``outdir`` (created if needed)."""
    os.makedirs(outdir, exist_ok=True)
    sidecar = _sidecar_dict(instance)
    dataset_meta = {key: sidecar[key] for key in sidecar if not key.startswith("query")}
    from .distributions import save_dataset

    save_dataset(instance.dataset, os.path.join(outdir, DATASET_FILENAME), dataset_meta)
    with open(os.path.join(outdir, SIDECAR_FILENAME), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(sidecar, sort_keys=True, separators=(",", ":")) + "\n")


def load_instance(outdir):
    """Rebuild the instance saved by :func:`save_instance`."""
    from .distributions import load_dataset

    dataset, _ = load_dataset(os.path.join(outdir, DATASET_FILENAME))
    with open(os.path.join(outdir, SIDECAR_FILENAME), "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    problem = sidecar["problem"]
    n = sidecar["n"]
    if problem == "gapss":
        query_bits = SupportSet.from_indices(n, [e for e, _ in sidecar["query"]])
        return GapssInstance(
            dataset,
            sidecar["w_u"],
            sidecar["w_q"],
            sidecar["truth_index"],
            query_bits,
            sidecar["seed"],
        )
    if "query_stream" in sidecar:
        query = QueryMultiset.from_draws(n, np.asarray(sidecar["query_stream"], dtype=np.int64))
    else:
        query = QueryMultiset.from_pairs(n, sidecar["query"])
    if problem == "hude":
        return HudeInstance(
            dataset,
            sidecar["epsilon"],
            sidecar["s"],
            sidecar["truth_index"],
            query,
            sidecar["seed"],
            sidecar.get("attempts", 1),
        )
    if problem == "urde":
        return UrdeInstance(
            dataset,
            sidecar["w_u"],
            sidecar["s"],
            sidecar["truth_index"],
            query,
            sidecar["seed"],
            sidecar.get("truth_resamples", 0),
        )
    raise ValueError(f"unknown problem type in sidecar: {problem!r}")
