"""Instance generators, Poisson samplers, the reduction, and instance files."""

import math
import os

import numpy as np
import pytest

from hude.distributions import l1_distance
from hude.instances import (
    GapssInstance,
    GenerationError,
    gen_gapss,
    gen_hude,
    gen_urde,
    implied_s,
    load_instance,
    poisson,
    poisson_plus,
    reduce_gapss_to_urde,
    required_w_q,
    save_instance,
)
from hude.distributions import SupportSet
from hude.rng import substream


class TestGenHude:
    def test_single_distribution_toy(self):
        inst = gen_hude(4, 1, 1.0, 2.0, seed=0)
        assert inst.truth_index == 0
        assert inst.dataset.support(0).cardinality == 2
        assert inst.query.total == 2
        assert set(inst.query.counts) <= set(inst.dataset.support(0).indices.tolist())

    def test_default_experiment_shape(self):
        # The benchmark default instance shape: k=50000 supports of size 250
        # over n=500, with S = n/s = 50 query samples.
        inst = gen_hude(500, 50000, 0.5, 10.0, seed=1)
        assert inst.dataset.k == 50000
        assert inst.dataset.n == 500
        assert inst.query.total == 50
        sizes = inst.dataset.matrix.sum(axis=1)
        assert (sizes == 250).all()

    def test_promise_holds_against_truth(self):
        inst = gen_hude(200, 150, 0.5, 10.0, seed=3)
        truth = inst.dataset.distribution(inst.truth_index)
        for j in range(inst.dataset.k):
            if j != inst.truth_index:
                assert l1_distance(truth, inst.dataset.distribution(j)) >= inst.epsilon

    def test_promise_passes_first_attempt_at_moderate_separation(self):
        # At n=500, eps=0.5, violations are far out in the tail; across 100
        # seeds every instance should clear the check without resampling.
        first_try = sum(
            gen_hude(500, 1000, 0.5, 10.0, seed=seed).attempts == 1 for seed in range(100)
        )
        assert first_try >= 99

    def test_unsatisfiable_promise_raises_with_pair(self):
        # eps=2 requires disjoint supports, impossible for half supports of
        # the same universe at k > 1.
        with pytest.raises(GenerationError, match=r"\|\|p_\d+ - p_\d+\|\|_1"):
            gen_hude(8, 4, 2.0, 2.0, seed=0, max_retries=2)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            gen_hude(7, 2, 1.0, 2.0, seed=0)  # odd domain
        with pytest.raises(ValueError):
            gen_hude(8, 2, 1.0, 16.0, seed=0)  # fewer than one sample
        with pytest.raises(ValueError):
            gen_hude(8, 2, 3.0, 2.0, seed=0)  # separation above 2


class TestGenUrde:
    def test_degenerate_full_supports(self):
        inst = gen_urde(32, 5, 1.0, 4.0, seed=2)
        assert inst.dataset.matrix.all()

    def test_mean_query_total(self):
        # E[total] = E[|supp|]/(s*w_u) = n/s by the law of total expectation.
        n, s, reps = 1000, 10.0, 2000
        totals = np.array(
            [gen_urde(n, 2, 0.5, s, seed=seed).query.total for seed in range(reps)],
            dtype=float,
        )
        stderr = totals.std(ddof=1) / math.sqrt(reps)
        assert abs(totals.mean() - n / s) <= 3.0 * stderr

    def test_mean_support_size(self):
        inst = gen_urde(500, 100, 0.5, 10.0, seed=4)
        sizes = inst.dataset.matrix.sum(axis=1).astype(float)
        stderr = math.sqrt(500 * 0.25 / 100)
        assert abs(sizes.mean() - 250.0) <= 3.0 * stderr

    def test_query_supported_on_truth(self):
        inst = gen_urde(200, 20, 0.5, 8.0, seed=5)
        truth_support = inst.dataset.support(inst.truth_index)
        for element in inst.query.distinct.indices.tolist():
            assert truth_support.has(element)

    def test_validation(self):
        with pytest.raises(ValueError):
            gen_urde(16, 2, 0.0, 4.0, seed=0)
        with pytest.raises(ValueError):
            gen_urde(16, 2, 0.5, 0.0, seed=0)


class TestGenGapss:
    def test_query_is_subset_of_truth(self):
        inst = gen_gapss(10_000, 3, 0.5, 0.02, seed=6)
        truth = inst.dataset.matrix[inst.truth_index]
        assert not np.any(inst.query.bits & ~truth)

    def test_query_density(self):
        inst = gen_gapss(10_000, 3, 0.5, 0.02, seed=6)
        freq = inst.query.cardinality / inst.n
        assert abs(freq - 0.02) <= 3.0 * math.sqrt(0.02 * 0.98 / inst.n)

    def test_truth_marginal_density(self):
        # Column sums of the joint law: the truth's marginal inclusion
        # probability is w_q + (w_u - w_q) = w_u.
        inst = gen_gapss(10_000, 2, 0.5, 0.02, seed=7)
        freq = inst.dataset.matrix[inst.truth_index].mean()
        assert abs(freq - 0.5) <= 3.0 * math.sqrt(0.25 / inst.n)

    def test_near_equal_parameters_copy_the_truth(self):
        inst = gen_gapss(10_000, 2, 0.5, 0.5 - 1e-9, seed=8)
        truth = inst.dataset.matrix[inst.truth_index]
        agreement = np.mean(inst.query.bits == truth)
        assert agreement >= 1.0 - 1e-4

    def test_parameter_order_enforced(self):
        with pytest.raises(ValueError):
            gen_gapss(100, 2, 0.2, 0.5, seed=0)
        with pytest.raises(ValueError):
            gen_gapss(100, 2, 0.5, 0.5, seed=0)


class TestPoisson:
    def test_mean_small_rate(self):
        rng = substream(9, "poisson-mean")
        draws = np.array([poisson(0.04, rng) for _ in range(100_000)], dtype=float)
        stderr = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - 0.04) <= 3.0 * stderr

    def test_mean_large_rate_chunked(self):
        rng = substream(9, "poisson-large")
        draws = np.array([poisson(100.0, rng) for _ in range(5000)], dtype=float)
        stderr = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - 100.0) <= 3.0 * stderr

    def test_rate_validation(self):
        with pytest.raises(ValueError):
            poisson(0.0, substream(0, "x"))
        with pytest.raises(ValueError):
            poisson_plus(-1.0, substream(0, "x"))

    def test_truncated_point_mass(self):
        # P[X=1] = lam e^-lam / (1 - e^-lam) ~ 0.98013 at lam = 0.04.
        lam = 0.04
        expected = lam * math.exp(-lam) / (1.0 - math.exp(-lam))
        rng = substream(10, "plus-mass")
        draws = np.array([poisson_plus(lam, rng) for _ in range(40_000)])
        ones = float(np.mean(draws == 1))
        stderr = math.sqrt(expected * (1 - expected) / draws.size)
        assert abs(ones - expected) <= 3.0 * stderr

    def test_truncated_never_zero(self):
        rng = substream(10, "plus-positive")
        # Inverse-CDF branch gets the long run; the rejection branch a shorter one.
        assert min(poisson_plus(0.004, rng) for _ in range(1_000_000)) >= 1
        assert min(poisson_plus(0.4, rng) for _ in range(20_000)) >= 1
        assert min(poisson_plus(4.0, rng) for _ in range(5_000)) >= 1


class TestReduction:
    def test_matched_density_closed_form(self):
        # Independent coding of w_u (1 - e^{-1/(s w_u)}) at w_u=1/2, s=50.
        assert required_w_q(0.5, 50.0) == pytest.approx(
            0.5 * (1.0 - math.exp(-0.04)), rel=1e-12
        )
        assert required_w_q(0.5, 50.0) == pytest.approx(0.0196053, abs=1e-7)
        assert implied_s(0.5, required_w_q(0.5, 50.0)) == pytest.approx(50.0, rel=1e-12)

    def test_truth_preserved_and_supported(self):
        g = gen_gapss(200, 10, 0.5, required_w_q(0.5, 10.0), seed=11)
        reduced = reduce_gapss_to_urde(g, 10.0, seed=12)
        assert reduced.truth_index == g.truth_index
        assert reduced.w_u == g.w_u
        query_elements = set(reduced.query.counts)
        assert query_elements == set(g.query.indices.tolist())

    def test_empty_query_maps_to_empty_query(self):
        g = gen_gapss(64, 4, 0.5, required_w_q(0.5, 10.0), seed=13)
        silent = GapssInstance(
            g.dataset, g.w_u, g.w_q, g.truth_index, SupportSet.from_indices(64, []), g.seed
        )
        reduced = reduce_gapss_to_urde(silent, 10.0, seed=14)
        assert reduced.query.total == 0

    def test_mismatched_parameters_report_both_sides(self):
        g = gen_gapss(64, 4, 0.5, 0.05, seed=15)
        with pytest.raises(ValueError, match=r"0\.05"):
            reduce_gapss_to_urde(g, 10.0, seed=16)

    def test_per_element_counts_mean(self):
        # Each query element receives a positive-conditioned count whose
        # unconditional law is Poisson(1/(s*w_u)); check the mean quickly
        # (the full goodness-of-fit lives in the acceptance suite).
        s, w_u = 10.0, 0.5
        lam = 1.0 / (s * w_u)
        counts = []
        for seed in range(300):
            g = gen_gapss(200, 4, w_u, required_w_q(w_u, s), seed=seed)
            reduced = reduce_gapss_to_urde(g, s, seed=seed + 10_000)
            support = g.dataset.matrix[g.truth_index]
            per_element = np.zeros(200, dtype=float)
            for e, c in reduced.query.counts.items():
                per_element[e] = c
            counts.extend(per_element[support].tolist())
        counts = np.asarray(counts)
        stderr = counts.std(ddof=1) / math.sqrt(counts.size)
        assert abs(counts.mean() - lam) <= 3.0 * stderr


class TestInstanceFiles:
    @pytest.mark.parametrize("problem", ["hude", "urde", "gapss"])
    def test_round_trip_bytes(self, problem, tmp_path):
        if problem == "hude":
            inst = gen_hude(100, 20, 0.5, 5.0, seed=17)
        elif problem == "urde":
            inst = gen_urde(100, 20, 0.5, 5.0, seed=17)
        else:
            inst = gen_gapss(100, 20, 0.5, 0.05, seed=17)
        first = tmp_path / "first"
        second = tmp_path / "second"
        save_instance(inst, first)
        back = load_instance(first)
        save_instance(back, second)
        for name in ("dataset.txt", "instance.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
        assert back.truth_index == inst.truth_index
        assert back.dataset == inst.dataset

    def test_query_stream_survives_round_trip(self, tmp_path):
        inst = gen_hude(60, 10, 0.5, 3.0, seed=18)
        save_instance(inst, tmp_path / "inst")
        back = load_instance(tmp_path / "inst")
        assert np.array_equal(back.query.order, inst.query.order)

    def test_generation_is_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        save_instance(gen_urde(80, 12, 0.5, 6.0, seed=19), a)
        save_instance(gen_urde(80, 12, 0.5, 6.0, seed=19), b)
        for name in ("dataset.txt", "instance.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        assert os.path.getsize(a / "dataset.txt") > 0
