"""Tests for the Poisson functional representation sampler."""

import numpy as np
import pytest

from csdlab.core.channel import DiscreteJointChannel
from csdlab.core.errors import ProposalBudgetExceeded
from csdlab.operations.divergence import expected_channel_csd
from csdlab.operations.sampler import (
    CommonRandomness,
    conditional_index_entropy,
    derive_seeds,
    exactness_test,
    pfr_decode,
    pfr_encode,
    total_variation,
    tv_ladder,
)


class TestCommonRandomness:
    """Tests for the shared proposal stream."""

    def test_stream_is_random_access(self, bsc):
        z = CommonRandomness.for_channel(bsc, 12345)
        increments, symbols = z.proposals(1, 64)
        tail_increments, tail_symbols = z.proposals(33, 32)
        assert np.array_equal(increments[32:], tail_increments)
        assert np.array_equal(symbols[32:], tail_symbols)
        assert all(z.symbol(i + 1) == symbols[i] for i in range(64))

    def test_increments_are_positive(self, bsc):
        increments, _ = CommonRandomness.for_channel(bsc, 3).proposals(1, 1000)
        assert np.all(increments > 0)
        assert increments.mean() == pytest.approx(1.0, abs=0.15)

    def test_symbol_frequencies_follow_marginal(self, random_channel):
        _, symbols = CommonRandomness.for_channel(random_channel, 8).proposals(1, 40_000)
        freq = np.bincount(symbols, minlength=random_channel.n_y) / symbols.size
        assert freq == pytest.approx(random_channel.marginal_y, abs=0.01)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            CommonRandomness(2 ** 64, (0.5, 0.5))

    def test_indices_start_at_one(self, bsc):
        z = CommonRandomness.for_channel(bsc, 0)
        with pytest.raises(ValueError):
            z.proposals(0, 4)
        with pytest.raises(ValueError):
            z.symbol(0)


class TestEncodeDecode:
    """Tests for pfr_encode and pfr_decode."""

    def test_independent_channel_selects_first(self, independent):
        for seed in range(50):
            z = CommonRandomness.for_channel(independent, seed)
            for x in range(independent.n_x):
                assert pfr_encode(independent, x, z).index == 1

    def test_deterministic(self, random_channel):
        z = CommonRandomness.for_channel(random_channel, 77)
        assert pfr_encode(random_channel, 2, z) == pfr_encode(random_channel, 2, z)

    def test_round_trip(self, random_channel):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            x = int(rng.integers(random_channel.n_x))
            z = CommonRandomness.for_channel(random_channel, int(rng.integers(2 ** 63)))
            result = pfr_encode(random_channel, x, z)
            assert pfr_decode(result.index, z) == result.y_out

    def test_first_index_decodes_first_symbol(self, bsc):
        z = CommonRandomness.for_channel(bsc, 5)
        assert pfr_decode(1, z) == int(z.proposals(1, 1)[1][0])

    def test_output_has_positive_likelihood(self, identity):
        for seed in range(200):
            z = CommonRandomness.for_channel(identity, seed)
            for x in (0, 1):
                assert pfr_encode(identity, x, z).y_out == x

    def test_argmin_is_exact(self, bsc):
        z = CommonRandomness.for_channel(bsc, 42)
        result = pfr_encode(bsc, 0, z)
        increments, symbols = z.proposals(1, result.proposals_examined + 200)
        scores = np.cumsum(increments) / bsc.ratio[0][symbols]
        assert int(np.argmin(scores)) + 1 == result.index

    def test_budget_exceeded(self):
        skewed = DiscreteJointChannel(np.array([[0.001, 0.0], [0.0, 0.999]]))
        z = CommonRandomness.for_channel(skewed, 1)
        with pytest.raises(ProposalBudgetExceeded):
            pfr_encode(skewed, 0, z, max_proposals=2)

    def test_gaussian_rejected(self, gaussian):
        with pytest.raises(TypeError):
            conditional_index_entropy(gaussian, 100, 0)


class TestIndexEntropy:
    """Tests for H(N* | Z)."""

    def test_derived_seeds_are_stable(self):
        assert np.array_equal(derive_seeds(3, 10), derive_seeds(3, 10))
        assert derive_seeds(3, 10).dtype == np.uint64

    def test_independent_channel_is_deterministic(self, independent):
        estimate = conditional_index_entropy(independent, 100, 0)
        assert estimate.value == 0.0
        assert estimate.stderr == 0.0

    @pytest.mark.parametrize('fixture', ['bsc', 'identity', 'random_channel'])
    def test_lower_bound(self, fixture, request):
        channel = request.getfixturevalue(fixture)
        estimate = conditional_index_entropy(channel, 500, seed0=2024)
        assert estimate.value >= expected_channel_csd(channel) - 3 * estimate.stderr - 1e-9

    def test_too_few_seeds(self, bsc):
        with pytest.raises(ValueError):
            conditional_index_entropy(bsc, 50, 0)


class TestExactness:
    """Tests for the simulated joint law."""

    def test_total_variation_of_truth_is_zero(self, bsc):
        assert total_variation(bsc, bsc.joint) == 0.0

    @pytest.mark.slow
    def test_independent_channel(self, independent):
        assert exactness_test(independent, 100_000, seed=1) < 0.01

    def test_minimum_samples(self, bsc):
        with pytest.raises(ValueError):
            exactness_test(bsc, 999, seed=0)

    @pytest.mark.slow
    def test_bsc_million_samples(self, bsc):
        assert exactness_test(bsc, 1_000_000, seed=11) < 0.005

    @pytest.mark.slow
    def test_tv_shrinks_with_sample_size(self, bsc):
        small, large = tv_ladder(bsc, [2_500, 10_000], replicates=50, seed=6)
        assert large < small
        assert small / large == pytest.approx(2.0, rel=0.35)
