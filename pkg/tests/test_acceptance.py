"""End-to-end acceptance gates for the ranking-stability engines.

Every numeric gate states its tolerance inline; golden values are confirmed
by independent grid oracles where noted.  The cross-engine cases pin seeds
whose top-3 stability gaps exceed the Monte-Carlo noise band, so exact and
sampled engines must agree on both order and value.
"""

import time
import timeit

import numpy as np
import pytest

from stablerank.exact2d import get_next_2d, iter_regions, ray_sweep, verify_2d
from stablerank.exactmd import get_next_md, init_md_state
from stablerank.geometry import rotation_matrix
from stablerank.model import Dataset, Ranking, generate_synthetic, rank
from stablerank.randomized import (
    confidence_error,
    expected_samples_to_observe,
    get_next_fixed_budget,
    init_mc_state,
)
from stablerank.sampler import RngStream, build_cap_cdf, inverse_cdf_3d, sample_u

from oracles import grid_ranking_fraction_2d, grid_topk_set_fraction_2d

REFERENCE_ORDER = ("t2", "t4", "t3", "t5", "t1")


class TestToyGoldenSuite:
    def test_reference_ranking_is_exact_and_fast(self, toy):
        assert rank(toy, (1.0, 1.0)).order == REFERENCE_ORDER
        rank(toy, (1.0, 1.0))  # warm-up
        per_call = min(
            timeit.repeat(lambda: rank(toy, (1.0, 1.0)), number=100, repeat=5)
        ) / 100
        assert per_call < 1e-3  # < 1 ms

    def test_eleven_regions_tile_the_quadrant(self, toy):
        heap = ray_sweep(toy)
        assert heap.region_count == 11
        widths = [res.interval.width for res in iter_regions(heap, toy)]
        assert len(widths) == 11
        assert sum(widths) == pytest.approx(np.pi / 2, abs=1e-9)

    def test_verify_golden_interval_and_stability(self, toy):
        res = verify_2d(toy, Ranking(REFERENCE_ORDER))
        assert res.interval.lo == pytest.approx(0.7378, abs=1e-3)
        assert res.interval.hi == pytest.approx(0.8761, abs=1e-3)
        assert res.stability == pytest.approx(0.0880, abs=1e-3)
        oracle = grid_ranking_fraction_2d(toy, REFERENCE_ORDER, m=1_000_000)
        assert res.stability == pytest.approx(oracle, abs=1e-5)

    def test_get_next_stability_sequence(self, toy):
        heap = ray_sweep(toy)
        seq = [get_next_2d(heap, toy).stability for _ in range(3)]
        assert seq[0] == pytest.approx(0.3948, abs=1e-3)
        assert seq[1] == pytest.approx(0.1444, abs=1e-3)
        assert seq[2] == pytest.approx(0.1015, abs=1e-3)


class TestSkylineTop3:
    def test_most_stable_top3_set(self, skyline):
        state = init_mc_state("topk_set", 3, seed=0)
        res = get_next_fixed_budget(state, skyline, budget=100_000)
        assert res.key == ("t2", "t3", "t4")
        assert res.stability == pytest.approx(0.9607, abs=0.01)
        oracle = grid_topk_set_fraction_2d(skyline, {"t2", "t3", "t4"}, 3, m=1_000_000)
        assert oracle == pytest.approx(0.9607, abs=1e-3)
        assert res.stability == pytest.approx(oracle, abs=0.01)


class TestSamplerSuite:
    def test_inverse_cdf_worked_value(self):
        assert inverse_cdf_3d(0.13, np.pi / 20) == pytest.approx(np.pi / 55.5, abs=1e-3)

    def test_cap_fraction_matches_cap_area(self):
        W = sample_u(3, RngStream(0), size=100_000)
        axis = np.ones(3) / np.sqrt(3)
        frac = float(np.mean(W @ axis >= np.cos(np.pi / 20)))
        assert frac == pytest.approx(4 * (1 - np.cos(np.pi / 20)), abs=0.005)

    @pytest.mark.parametrize("theta", [np.pi / 20, np.pi / 3])
    def test_cap_cdf_matches_closed_form(self, theta):
        gamma = 10_000
        table = build_cap_cdf(3, theta, gamma)
        xs = np.arange(gamma + 1) * table.eps
        closed = (1 - np.cos(xs)) / (1 - np.cos(theta))
        assert float(np.max(np.abs(table.L - closed))) <= 1 / gamma

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_rotations_are_orthogonal(self, d):
        rng = np.random.default_rng(d)
        eye = np.eye(d)
        for _ in range(100):
            rho = rng.uniform(0, np.pi / 2, size=d - 1)
            M = rotation_matrix(rho)
            assert float(np.max(np.abs(M.T @ M - eye))) <= 1e-10


CROSS_ENGINE_CASES = [
    (5, "anti_correlated", 0),
    (5, "correlated", 25),
    (5, "independent", 27),
    (6, "anti_correlated", 33),
    (6, "correlated", 32),
    (6, "independent", 16),
    (8, "anti_correlated", 17),
    (8, "correlated", 11),
    (8, "independent", 27),
    (10, "anti_correlated", 36),
    (10, "correlated", 20),
    (10, "independent", 1),
    (12, "anti_correlated", 27),
    (12, "correlated", 22),
    (12, "independent", 38),
    (15, "anti_correlated", 5),
    (15, "correlated", 2),
    (20, "anti_correlated", 9),
    (20, "correlated", 30),
    (20, "independent", 36),
]


class TestCrossEngineAgreement:
    @pytest.mark.parametrize("n,mode,seed", CROSS_ENGINE_CASES)
    def test_top3_rankings_and_stabilities_agree(self, n, mode, seed):
        samples = 100_000
        dataset = generate_synthetic(n, 2, mode, seed)
        exact = []
        for res in iter_regions(ray_sweep(dataset), dataset):
            exact.append((res.ranking.order, res.stability))
            if len(exact) == 3:
                break
        assert len(exact) == 3
        md_state = init_md_state(dataset, n_samples=samples, seed=7)
        mc_state = init_mc_state(seed=7)
        for order, stability in exact:
            band = 3 * np.sqrt(stability * (1 - stability) / samples)
            md = get_next_md(md_state)
            assert md.ranking.order == order
            assert abs(md.estimate.value - stability) <= band
            mc = get_next_fixed_budget(mc_state, dataset, budget=samples)
            assert mc.key == order
            assert abs(mc.estimate.value - stability) <= band


class TestStatisticalGuarantees:
    def test_confidence_interval_coverage(self, toy):
        # ground truth: the widest toy region covers [0, 0.6202494859828215)
        boundary = 0.6202494859828215
        truth = boundary / (np.pi / 2)
        trials, n = 500, 2000
        covered = 0
        for i in range(trials):
            W = sample_u(2, RngStream(5000 + i), size=n)
            phat = float(np.mean(np.arctan2(W[:, 1], W[:, 0]) < boundary))
            e = confidence_error(phat, n, alpha=0.05)
            covered += abs(phat - truth) <= e
        assert covered / trials >= 0.92

    def test_expected_first_hit_cost(self):
        # exchange angle 3*pi/8 puts ("a", "b") on exactly a quarter of the quadrant
        dataset = Dataset.from_pairs(
            [("a", (0.3, 0.7)), ("b", (0.3 + float(np.tan(3 * np.pi / 8)) / 10, 0.6))]
        )
        mean, variance = expected_samples_to_observe(0.25)
        assert (mean, variance) == (4.0, 12.0)
        rng = RngStream(123)
        total = 0
        for _ in range(1000):
            while True:
                total += 1
                if rank(dataset, sample_u(2, rng)).order == ("a", "b"):
                    break
        empirical = total / 1000
        assert abs(empirical - mean) <= 0.1 * mean


class TestCorrelationDirection:
    def test_correlated_data_has_the_most_stable_top10(self):
        ordered = 0
        for seed in range(5):
            values = {}
            for mode in ("correlated", "independent", "anti_correlated"):
                dataset = generate_synthetic(10_000, 3, mode, seed)
                state = init_mc_state("topk_set", 10, seed=seed)
                res = get_next_fixed_budget(state, dataset, budget=3000)
                values[mode] = res.stability
            assert all(0 < v <= 1 for v in values.values())
            ordered += (
                values["correlated"] >= values["independent"] >= values["anti_correlated"]
            )
        assert ordered >= 3  # majority of the 5 seeds

class TestPerformance:
    def test_ray_sweep_ten_thousand_items(self):
        dataset = generate_synthetic(10_000, 2, "independent", 1)
        start = time.perf_counter()
        heap = ray_sweep(dataset)
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0
        assert heap.region_count >= 1
        assert get_next_2d(heap, dataset) is not None

    def test_randomized_get_next_hundred_thousand_items(self):
        dataset = generate_synthetic(100_000, 3, "correlated", 0)
        state = init_mc_state("topk_set", 10, seed=0)
        start = time.perf_counter()
        res = get_next_fixed_budget(state, dataset, budget=5000)
        elapsed = time.perf_counter() - start
        assert elapsed < 300.0
        assert res is not None and 0 < res.stability <= 1
