"""Self-contained invariant checks behind the ``verify`` CLI subcommand.

Each check is small, seeded, and independent; a check returns a failure
message or None.  These duplicate the cheapest assertions of the test suite
so a packaged installation can be validated without pytest.
"""
from __future__ import annotations

import math

import numpy as np

from . import bench, distributions, elimination, instances, subset_index, tradeoff
from .rng import substream


def _check_counter_discipline() -> str | None:
    support = distributions.SupportSet.from_indices(16, [1, 3, 5])
    counter = distributions.OpCounter()
    for element, expected in ((1, True), (2, False), (5, True)):
        got = distributions.contains(support, element, counter)
        if got is not expected:
            return f"contains({element}) returned {got}"
    if counter.membership_ops != 3:
        return f"three reads charged {counter.membership_ops} ops"
    return None


def _check_l1_values() -> str | None:
    def dist(n, a, b):
        return distributions.l1_distance(
            distributions.HalfUniformDistribution(distributions.SupportSet.from_indices(n, a)),
            distributions.HalfUniformDistribution(distributions.SupportSet.from_indices(n, b)),
        )

    cases = [
        (8, [0, 1, 2, 3], [0, 1, 2, 3], 0.0),
        (8, [0, 1, 2, 3], [4, 5, 6, 7], 2.0),
        (8, [0, 1, 2, 3], [2, 3, 4, 5], 1.0),
    ]
    for n, a, b, expected in cases:
        got = dist(n, a, b)
        if abs(got - expected) > 1e-12:
            return f"l1({a}, {b}) = {got}, expected {expected}"
    return None


def _check_dataset_roundtrip() -> str | None:
    rng = substream(11, "verify-roundtrip")
    matrix = distributions.random_bernoulli_supports(17, 29, 0.4, rng)
    data = distributions.Dataset(matrix)
    text = distributions.dumps_dataset(data, {"tag": "verify"})
    back, meta = distributions.loads_dataset(text)
    if back != data:
        return "dataset round trip changed the supports"
    if distributions.dumps_dataset(back, meta) != text:
        return "dataset round trip changed the bytes"
    return None


def _check_poisson_mean() -> str | None:
    rng = substream(12, "verify-poisson")
    draws = np.asarray([instances.poisson(0.04, rng) for _ in range(100_000)], dtype=float)
    err = abs(draws.mean() - 0.04)
    limit = 3.0 * draws.std(ddof=1) / math.sqrt(draws.size)
    if err > limit:
        return f"mean off by {err:.2e} (> {limit:.2e})"
    return None


def _check_poisson_plus_positive() -> str | None:
    rng = substream(13, "verify-poisson-plus")
    for lam in (0.004, 0.04, 0.4, 4.0):
        if min(instances.poisson_plus(lam, rng) for _ in range(20_000)) < 1:
            return f"zero draw at rate {lam}"
    return None


def _check_reduction_relation() -> str | None:
    g = instances.gen_gapss(64, 5, 0.5, instances.required_w_q(0.5, 10.0), seed=5)
    reduced = instances.reduce_gapss_to_urde(g, 10.0, seed=6)
    if reduced.truth_index != g.truth_index:
        return "reduction changed the truth index"
    support = g.dataset.support(g.truth_index)
    for element in reduced.query.distinct.indices.tolist():
        if not support.has(element):
            return f"reduced query contains {element} outside the truth support"
    try:
        instances.reduce_gapss_to_urde(g, 11.0, seed=6)
    except ValueError:
        pass
    else:
        return "mismatched rate parameter accepted"
    return None


def _check_gapss_subset() -> str | None:
    g = instances.gen_gapss(512, 4, 0.5, 0.05, seed=21)
    truth_bits = g.dataset.matrix[g.truth_index]
    if np.any(g.query.bits & ~truth_bits):
        return "query vector is not a subset of the truth vector"
    return None


def _check_hude_promise() -> str | None:
    inst = instances.gen_hude(200, 64, 0.5, 10.0, seed=31)
    truth = inst.dataset.distribution(inst.truth_index)
    for j in range(inst.dataset.k):
        if j == inst.truth_index:
            continue
        if distributions.l1_distance(truth, inst.dataset.distribution(j)) < inst.epsilon:
            return f"separation promise violated by pair ({inst.truth_index}, {j})"
    return None


def _check_bucket_soundness() -> str | None:
    inst = instances.gen_hude(60, 40, 0.5, 6.0, seed=41)
    index = subset_index.preprocess(inst.dataset, subset_index.IndexParams(50, 3), seed=42)
    for i in range(50):
        probe = index.probes[i]
        in_bucket = set(index.buckets[i].tolist())
        for j in range(inst.dataset.k):
            holds = all(inst.dataset.support(j).has(int(e)) for e in probe)
            if holds != (j in in_bucket):
                return f"bucket {i} wrong about candidate {j}"
    return None


def _check_truth_containment() -> str | None:
    inst = instances.gen_hude(100, 30, 0.5, 5.0, seed=51)
    index = subset_index.preprocess(inst.dataset, subset_index.IndexParams(300, 2), seed=52)
    qbits = inst.query.distinct.bits
    for i in range(300):
        if np.all(qbits[index.probes[i]]):
            if inst.truth_index not in index.buckets[i]:
                return f"probe {i} contained in the query but truth missing from bucket"
    return None


def _check_elimination_monotone() -> str | None:
    inst = instances.gen_hude(80, 25, 0.5, 4.0, seed=61)
    counter = distributions.OpCounter()
    sizes = []
    alive = np.arange(inst.dataset.k)
    for element in inst.query.order.tolist():
        alive = alive[inst.dataset.matrix[alive, element]]
        sizes.append(alive.size)
    if any(b > a for a, b in zip(sizes, sizes[1:])):
        return "alive-set size increased"
    result = elimination.eliminate(
        inst.dataset, elimination.CandidateSet.full(inst.dataset.k), inst.query, counter
    )
    if result.outcome == "found" and result.index != inst.truth_index:
        return "eliminated down to a wrong candidate"
    if result.outcome == "exhausted":
        return "the truth was eliminated"
    return None


def _check_entropy_bounds() -> str | None:
    xs = np.linspace(0.0, 1.0, 10_002)[1:-1]
    h = tradeoff.entropy_gap(xs)
    gap = (0.5 - xs) ** 2
    if not np.all(h >= 2.0 * gap):
        return "lower entropy bound violated"
    if not np.all(h <= 16.0 * gap):
        return "upper entropy bound violated"
    if np.max(np.abs(h - tradeoff.kl_binary(xs, 0.5))) > 1e-12:
        return "entropy disagrees with the divergence from one half"
    return None


def _check_objective_codings() -> str | None:
    rng = substream(71, "verify-codings")
    for _ in range(2000):
        w_q = rng.uniform(0.001, 0.4)
        w_u = rng.uniform(w_q + 0.05, 0.95)
        t_u = rng.uniform(0.0, 1.0)
        if abs(t_u - w_u) < 0.05:
            continue
        t_q = rng.uniform(0.0, t_u)
        alpha = rng.uniform(0.0, 1.0)
        a = tradeoff.objective(t_q, t_u, w_q, w_u, alpha)
        b = tradeoff.objective_from_divergences(t_q, t_u, w_q, w_u, alpha)
        if abs(a - b) > 1e-12 * max(1.0, abs(a), abs(b)):
            return f"codings disagree by {abs(a - b):.2e} at ({t_q}, {t_u})"
    return None


def _check_kl_nonnegative() -> str | None:
    rng = substream(72, "verify-klnn")
    for _ in range(10_000):
        w_q = rng.uniform(0.01, 0.45)
        w_u = rng.uniform(w_q + 0.01, 0.99)
        t_u = rng.uniform(0.0, 1.0)
        t_q = rng.uniform(0.0, t_u)
        if tradeoff.coupling_kl(t_q, t_u, w_q, w_u) < 0:
            return f"negative divergence at ({t_q}, {t_u})"
    return None


def _check_refinement_stable() -> str | None:
    w_q = tradeoff.reduction_w_q(100.0, 0.5)
    alpha = 1.0 + 1.0 / math.log(w_q)
    a = tradeoff.minimize_objective(w_q, 0.5, alpha)
    b = tradeoff.minimize_objective(
        w_q, 0.5, alpha, tradeoff.SearchOptions(tu_points=801, tq_points=481)
    )
    if abs(a.value - b.value) > 1e-5:
        return f"infimum moved {abs(a.value - b.value):.2e} under densification"
    return None


def _check_upper_direction() -> str | None:
    for s in (2.0, 5.0, 20.0, 200.0, 5000.0):
        for rho_u in (0.1, 0.5, 0.9):
            for eps in (0.25, 0.5, 1.0, 1.5):
                exact = tradeoff.upper_exponent(s, rho_u, eps)
                simple = tradeoff.upper_exponent(s, rho_u, eps, simplified=True)
                if exact > simple + 1e-12:
                    return f"exact exponent above simplified at s={s} eps={eps}"
    return None


def _check_bench_determinism() -> str | None:
    config = bench.ExperimentConfig(
        sweep_param="k", sweep_values=(60,), n=40, S=30, ell=2, queries_per_point=5, seed=3
    )
    first = bench.run_sweep(config)
    second = bench.run_sweep(config)
    for a, b in zip(first, second):
        if (a.accuracy, a.mean_ops, a.L) != (b.accuracy, b.mean_ops, b.L):
            return f"reruns disagree: {a} vs {b}"
    return None


SUITES = {
    "distributions": {
        "counter-discipline": _check_counter_discipline,
        "l1-hand-values": _check_l1_values,
        "dataset-roundtrip": _check_dataset_roundtrip,
    },
    "instances": {
        "poisson-mean": _check_poisson_mean,
        "poisson-plus-positive": _check_poisson_plus_positive,
        "reduction-relation": _check_reduction_relation,
        "gapss-query-subset": _check_gapss_subset,
        "hude-promise": _check_hude_promise,
    },
    "index": {
        "bucket-soundness": _check_bucket_soundness,
        "truth-containment": _check_truth_containment,
        "elimination-monotone": _check_elimination_monotone,
    },
    "tradeoff": {
        "entropy-bounds": _check_entropy_bounds,
        "objective-two-codings": _check_objective_codings,
        "kl-nonnegative": _check_kl_nonnegative,
        "refinement-stable": _check_refinement_stable,
        "upper-bound-direction": _check_upper_direction,
    },
    "bench": {
        "sweep-determinism": _check_bench_determinism,
    },
}


def run_suite(suite: str = "all") -> list[tuple[str, bool, str]]:
    """Run the named suite; returns (check name, passed, detail) triples."""
    if suite == "all":
        groups = SUITES.values()
    elif suite in SUITES:
        groups = [SUITES[suite]]
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {['all', *SUITES]}")
    results = []
    for group in groups:
        for name, fn in group.items():
            try:
                failure = fn()
            except Exception as exc:  # a crashed check is a failed check
                failure = f"raised {type(exc).__name__}: {exc}"
            results.append((name, failure is None, failure or "ok"))
    return results
