import numpy as np
import pytest

from stablerank.model import Dataset, RegionOfInterest, rank
from stablerank.randomized import (
    MonteCarloState,
    SampleBudgetExceededError,
    confidence_error,
    expected_samples_to_observe,
    get_next_fixed_budget,
    get_next_fixed_error,
    init_mc_state,
)

WIDEST_TOY = ("t2", "t4", "t1", "t3", "t5")


class TestConfidenceArithmetic:
    def test_worked_value(self):
        assert confidence_error(0.02, 10_000, 0.05) == pytest.approx(0.0027439, abs=1e-6)

    def test_degenerate_frequencies_have_zero_error(self):
        assert confidence_error(0.0, 100) == 0.0
        assert confidence_error(1.0, 100) == 0.0

    def test_shrinks_with_n(self):
        assert confidence_error(0.3, 40_000) == pytest.approx(confidence_error(0.3, 10_000) / 2)

    def test_validates_inputs(self):
        with pytest.raises(ValueError):
            confidence_error(1.5, 100)
        with pytest.raises(ValueError):
            confidence_error(0.5, 0)
        with pytest.raises(ValueError):
            confidence_error(0.5, 100, alpha=0.0)

    def test_expected_samples(self):
        mean, var = expected_samples_to_observe(0.25)
        assert (mean, var) == (4.0, 12.0)
        assert expected_samples_to_observe(1.0) == (1.0, 0.0)
        with pytest.raises(ValueError):
            expected_samples_to_observe(0.0)


class TestStateValidation:
    def test_full_mode_takes_no_k(self):
        with pytest.raises(ValueError):
            init_mc_state("full", k=3)

    def test_topk_modes_need_k(self):
        with pytest.raises(ValueError):
            init_mc_state("topk_set")
        with pytest.raises(ValueError):
            init_mc_state("topk_ranked", k=0)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            init_mc_state("partial")


class TestFixedBudget:
    def test_toy_first_call_finds_the_widest_region(self, toy):
        state = init_mc_state(seed=0)
        res = get_next_fixed_budget(state, toy, budget=100_000)
        assert res.key == WIDEST_TOY
        assert res.stability == pytest.approx(0.39486, abs=0.005)
        assert res.samples_used == 100_000
        assert res.estimate.samples == 100_000
        assert rank(toy, res.weights).order == res.key

    def test_skyline_top3_set(self, skyline):
        state = init_mc_state("topk_set", k=3, seed=1)
        res = get_next_fixed_budget(state, skyline, budget=100_000)
        assert res.key == ("t2", "t3", "t4")
        expected = 1 - 4 * np.arctan(0.03 / 0.97) / np.pi
        assert res.stability == pytest.approx(expected, abs=0.005)
        assert res.stability == pytest.approx(0.9607, abs=0.005)

    def test_topk_ranked_prefix(self, toy):
        state = init_mc_state("topk_ranked", k=2, seed=2)
        res = get_next_fixed_budget(state, toy, budget=50_000)
        assert res.key == ("t2", "t4")
        # the three regions below 0.87606 share the ranked prefix (t2, t4)
        assert res.stability == pytest.approx(0.8760580505981935 / (np.pi / 2), abs=0.007)

    def test_successive_calls_return_distinct_keys_then_none(self):
        ds = Dataset.from_pairs([("a", (0.9, 0.9)), ("b", (0.1, 0.1))])
        state = init_mc_state(seed=0)
        first = get_next_fixed_budget(state, ds, budget=100)
        assert first.key == ("a", "b") and first.stability == 1.0
        assert get_next_fixed_budget(state, ds, budget=100) is None

    def test_single_item_dataset(self):
        ds = Dataset.from_pairs([("only", (0.2, 0.8))])
        state = init_mc_state(seed=0)
        res = get_next_fixed_budget(state, ds, budget=50)
        assert res.key == ("only",)
        assert res.stability == 1.0 and res.estimate.confidence_error == 0.0
        assert get_next_fixed_budget(state, ds, budget=50) is None

    def test_all_toy_keys_are_true_regions_and_distinct(self, toy):
        from stablerank.exact2d import iter_regions, ray_sweep

        true_orders = {r.ranking.order for r in iter_regions(ray_sweep(toy), toy)}
        state = init_mc_state(seed=3)
        seen = []
        while True:
            res = get_next_fixed_budget(state, toy, budget=3000)
            if res is None:
                break
            seen.append(res.key)
        assert len(seen) == len(set(seen))
        assert set(seen) <= true_orders

    def test_counts_conserve_samples(self, toy):
        state = init_mc_state(seed=4)
        get_next_fixed_budget(state, toy, budget=5000)
        get_next_fixed_budget(state, toy, budget=2500)
        assert state.n_total == 7500
        assert sum(state.counts.values()) == 7500

    def test_stability_uses_all_samples_ever_drawn(self, toy):
        state = init_mc_state(seed=5)
        get_next_fixed_budget(state, toy, budget=4000)
        res = get_next_fixed_budget(state, toy, budget=4000)
        assert res.estimate.samples == 8000
        assert res.stability == state.counts[res.key] / 8000

    def test_deterministic_for_fixed_seed(self, toy):
        seqs = []
        for _ in range(2):
            state = init_mc_state(seed=11)
            seq = []
            for _ in range(4):
                r = get_next_fixed_budget(state, toy, budget=2000)
                seq.append((r.key, r.stability, r.weights))
            seqs.append(seq)
        assert seqs[0] == seqs[1]

    def test_roi_restricts_sampling(self, toy):
        roi = RegionOfInterest.cone((np.cos(0.8), np.sin(0.8)), 0.1)
        state = init_mc_state(seed=6)
        res = get_next_fixed_budget(state, toy, roi, budget=30_000)
        assert res.key == ("t2", "t4", "t3", "t5", "t1")
        assert res.stability == pytest.approx((0.8760580505981935 - 0.7378150601204648) / 0.2, abs=0.01)

    def test_score_ties_produce_canonical_keys(self):
        ds = Dataset.from_pairs([("a", (0.9, 0.9)), ("b", (0.5, 0.5)), ("c", (0.5, 0.5))])
        state = init_mc_state("topk_set", k=2, seed=7)
        res = get_next_fixed_budget(state, ds, budget=200)
        assert res.key == ("a", "b")
        assert res.stability == 1.0

    def test_budget_validated(self, toy):
        with pytest.raises(ValueError):
            get_next_fixed_budget(init_mc_state(), toy, budget=0)


class TestFixedError:
    def test_toy_reaches_the_error_target_near_expected_cost(self, toy):
        state = init_mc_state(seed=0)
        res = get_next_fixed_error(state, toy, e_target=0.01)
        assert res.key == WIDEST_TOY
        assert res.estimate.confidence_error <= 0.01
        # (1.96/0.01)^2 * 0.395 * 0.605 is about 9.2e3
        assert 6_000 <= res.samples_used <= 14_000

    def test_loose_target_stops_after_first_sample(self, toy):
        state = init_mc_state(seed=1)
        res = get_next_fixed_error(state, toy, e_target=0.5)
        assert res.samples_used == 1
        assert res.estimate.confidence_error <= 0.5

    def test_already_satisfied_state_draws_nothing(self, toy):
        state = init_mc_state(seed=2)
        get_next_fixed_budget(state, toy, budget=100_000)
        res = get_next_fixed_error(state, toy, e_target=0.01)
        assert res.samples_used == 0
        assert res.estimate.confidence_error <= 0.01

    def test_sample_cap_raises_with_partial_state(self, toy):
        state = init_mc_state(seed=3)
        with pytest.raises(SampleBudgetExceededError) as err:
            get_next_fixed_error(state, toy, e_target=1e-4, sample_cap=1000)
        assert err.value.drawn == 1000
        assert err.value.state is state
        key, estimate = err.value.best
        assert key == WIDEST_TOY
        assert estimate.value == pytest.approx(0.395, abs=0.1)
        assert state.n_total == 1000  # the partial draws are retained

    def test_validates_target(self, toy):
        with pytest.raises(ValueError):
            get_next_fixed_error(init_mc_state(), toy, e_target=0.0)

    def test_deterministic_for_fixed_seed(self, toy):
        a = get_next_fixed_error(init_mc_state(seed=9), toy, e_target=0.02)
        b = get_next_fixed_error(init_mc_state(seed=9), toy, e_target=0.02)
        assert (a.key, a.stability, a.samples_used) == (b.key, b.stability, b.samples_used)

    def test_successive_calls_return_distinct_keys(self, toy):
        state = init_mc_state(seed=4)
        first = get_next_fixed_error(state, toy, e_target=0.02)
        second = get_next_fixed_error(state, toy, e_target=0.02)
        assert first.key != second.key
        assert second.estimate.confidence_error <= 0.02
        assert second.stability <= first.stability + 2 * 0.02


class TestStateInternals:
    def test_weight_sums_track_counts(self, toy):
        state = init_mc_state(seed=5)
        get_next_fixed_budget(state, toy, budget=2000)
        assert set(state.weight_sums) == set(state.counts)
        assert sum(state.counts.values()) == state.n_total
        for key, total in state.weight_sums.items():
            # a sum of unit vectors in the positive quadrant
            assert np.all(total >= 0)
            norm = np.linalg.norm(total)
            assert 0 < norm <= state.counts[key] + 1e-9

    def test_returned_list_grows_in_order(self, toy):
        state = init_mc_state(seed=6)
        k1 = get_next_fixed_budget(state, toy, budget=2000).key
        k2 = get_next_fixed_budget(state, toy, budget=2000).key
        assert state.returned == [k1, k2]
