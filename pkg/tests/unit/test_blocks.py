"""Tests for product-block level laws and the redundancy curve."""

import itertools
import math

import numpy as np
import pytest
from scipy.stats import binom

from csdlab.core.channel import DiscreteJointChannel, mutual_information
from csdlab.core.errors import BlockTooLarge, SingularChannel, SymmetryRequired
from csdlab.operations.blocks import (
    block_csd,
    block_kl,
    block_level_distribution,
    clt_check,
    expected_block_csd,
    extend_level_distribution,
    redundancy_curve,
    redundancy_slope,
    validate_symmetry,
    verify_cdf_identity,
)
from csdlab.operations.divergence import channel_simulation_divergence, phi


class TestLevelDistribution:
    """Tests for the exact law of the block log-ratio sum."""

    def test_single_bsc_letter(self, bsc):
        dist = block_level_distribution(bsc, [0])
        assert dist.levels == pytest.approx([math.log(0.22), math.log(1.78)])
        assert dist.masses_prior == pytest.approx([0.5, 0.5])
        assert dist.zero_ratio_mass == 0.0

    def test_identity_block(self, identity):
        n = 7
        dist = block_level_distribution(identity, [0, 1, 1, 0, 1, 0, 0])
        assert dist.levels == pytest.approx([n * math.log(2)])
        assert dist.masses_prior == pytest.approx([2.0 ** -n])
        assert dist.zero_ratio_mass == pytest.approx(1 - 2.0 ** -n)

    def test_bsc_binomial_oracle(self, bsc):
        n = 20
        dist = block_level_distribution(bsc, [0] * n)
        assert dist.levels.size == n + 1
        agreements = np.arange(n + 1)
        expected_levels = agreements * math.log(1.78) + (n - agreements) * math.log(0.22)
        assert dist.levels == pytest.approx(expected_levels)
        assert dist.masses_prior == pytest.approx(binom.pmf(agreements, n, 0.5), rel=1e-10)
        assert dist.masses_post == pytest.approx(binom.pmf(agreements, n, 0.89), rel=1e-10)

    def test_permutation_is_bit_identical(self, random_channel):
        block = [0, 3, 1, 2, 3, 3, 0, 1]
        shuffled = [3, 1, 0, 3, 2, 0, 1, 3]
        a = block_level_distribution(random_channel, block)
        b = block_level_distribution(random_channel, shuffled)
        assert a.same_as(b)

    def test_extension_matches_fresh_build(self, bsc):
        head = block_level_distribution(bsc, [0, 1, 0])
        extended = extend_level_distribution(head, bsc, [1, 1])
        fresh = block_level_distribution(bsc, [0, 1, 0, 1, 1])
        assert extended.levels == pytest.approx(fresh.levels)
        assert extended.log_prior == pytest.approx(fresh.log_prior)

    def test_level_cap(self, random_channel):
        with pytest.raises(BlockTooLarge):
            block_level_distribution(random_channel, [0, 1, 2, 3] * 4, cap=50)

    def test_change_of_measure(self, bsc, random_channel):
        for channel, block in ((bsc, [0, 1] * 8), (random_channel, [0, 3, 1, 2, 3])):
            dist = block_level_distribution(channel, block)
            np.testing.assert_allclose(dist.log_post, dist.levels + dist.log_prior, rtol=0, atol=1e-12)

    def test_width_function_of_short_block(self, bsc):
        dist = block_level_distribution(bsc, [0, 1, 1])
        width = dist.width_function()
        # the prior mean of the block ratio is one
        assert width.integral() == pytest.approx(1.0, abs=1e-12)
        assert width.target_values[0] == pytest.approx(1.0)
        assert block_csd(dist) == pytest.approx(math.fsum(phi(width.values) * width.widths), abs=1e-12)

    def test_empty_block(self, bsc):
        with pytest.raises(ValueError):
            block_level_distribution(bsc, [])


class TestBlockCsd:
    """Tests for D_CS of product posteriors."""

    def test_identity_is_n_bits(self, identity):
        for n in (1, 5, 64, 1024):
            assert block_csd(block_level_distribution(identity, [0] * n)) == pytest.approx(n)

    def test_single_letter_matches_slice(self, bsc):
        assert block_csd(block_level_distribution(bsc, [1])) == pytest.approx(0.78, abs=1e-12)

    def test_two_letters_brute_force(self, bsc):
        y_block = (0, 1)
        prior = []
        target = []
        for xs in itertools.product(range(2), repeat=2):
            prior.append(np.prod([bsc.marginal_x[x] for x in xs]))
            target.append(np.prod([bsc.posterior[x, y] for x, y in zip(xs, y_block)]))
        brute = channel_simulation_divergence(np.array(prior), np.array(target))
        assert block_csd(block_level_distribution(bsc, y_block)) == pytest.approx(brute, abs=1e-12)

    def test_block_kl_is_n_times_information(self, bsc):
        n = 12
        dist = block_level_distribution(bsc, [0] * n)
        # every y slice of the BSC has KL equal to I(X;Y)
        assert block_kl(dist) == pytest.approx(n * mutual_information(bsc), rel=1e-10)
        assert block_csd(dist) >= block_kl(dist)

    def test_non_symmetric_block_exceeds_information(self, random_channel):
        n = 3
        info = mutual_information(random_channel)
        expected = 0.0
        for block in itertools.product(range(random_channel.n_y), repeat=n):
            dist = block_level_distribution(random_channel, block)
            assert block_csd(dist) >= block_kl(dist) - 1e-9
            expected += np.prod(random_channel.marginal_y[list(block)]) * block_csd(dist)
        assert expected >= n * info - 1e-9


class TestExpectedBlockCsd:
    """Tests for E_{Y^n}[D_CS] in both modes."""

    def test_identity_exact(self, identity):
        estimate = expected_block_csd(identity, 9)
        assert estimate.value == pytest.approx(9.0)
        assert estimate.stderr == 0.0

    def test_independent_is_zero(self, independent):
        assert expected_block_csd(independent, 16).value == pytest.approx(0.0, abs=1e-9)

    def test_exact_requires_symmetry(self, random_channel):
        with pytest.raises(SymmetryRequired):
            expected_block_csd(random_channel, 4)

    def test_declared_symmetry_is_validated(self):
        joint = np.array([[0.4, 0.1], [0.2, 0.3]])
        channel = DiscreteJointChannel(joint, name='lying', symmetric=True)
        assert not validate_symmetry(channel)
        with pytest.raises(SymmetryRequired):
            expected_block_csd(channel, 4)

    def test_monte_carlo_matches_exact(self, bsc):
        exact = expected_block_csd(bsc, 32).value
        estimate = expected_block_csd(bsc, 32, mode='monte_carlo', samples=50, seed=2)
        assert estimate.value == pytest.approx(exact, abs=1e-9)

    def test_monte_carlo_is_reproducible(self, random_channel):
        a = expected_block_csd(random_channel, 6, mode='monte_carlo', samples=40, seed=9)
        b = expected_block_csd(random_channel, 6, mode='monte_carlo', samples=40, seed=9)
        assert a == b
        assert a.stderr > 0

    def test_unknown_mode(self, bsc):
        with pytest.raises(ValueError):
            expected_block_csd(bsc, 4, mode='approximate')


class TestRedundancyCurve:
    """Tests for the gap E[D_CS] - nI."""

    def test_identity_gaps_vanish(self, identity):
        points = redundancy_curve(identity, [1, 2, 8, 64, 512])
        assert all(abs(p.gap) <= 1e-9 for p in points)

    def test_independent_gaps_vanish(self, independent):
        points = redundancy_curve(independent, [2, 4, 16])
        assert all(abs(p.gap) <= 1e-9 for p in points)

    def test_points_report_lbn_ratio(self, bsc):
        points = redundancy_curve(bsc, [1, 4])
        assert points[0].gap_over_lbn is None
        assert points[1].gap_over_lbn == pytest.approx(points[1].gap / 2)

    def test_n_list_must_increase(self, bsc):
        with pytest.raises(ValueError):
            redundancy_curve(bsc, [8, 4])

    @pytest.mark.slow
    def test_bsc_half_log_law(self, bsc):
        points = redundancy_curve(bsc, [2 ** k for k in range(6, 14)])
        assert 0.4 <= redundancy_slope(points) <= 0.6
        distances = [abs(p.gap_over_lbn - 0.5) for p in points]
        assert distances[-1] < distances[0]

    def test_monte_carlo_curve(self, random_channel):
        points = redundancy_curve(random_channel, [2, 4], mode='monte_carlo', samples=30, seed=1)
        assert [p.n for p in points] == [2, 4]
        assert all(p.mode == 'monte_carlo' and p.seed == 1 for p in points)
        assert all(p.gap >= -3 * p.stderr - 1e-9 for p in points)


class TestCdfIdentity:
    """Tests for the two exact CDF expressions of the normalized log-width."""

    @pytest.mark.parametrize('n', [1, 2, 5, 8, 10])
    def test_bsc(self, bsc, n):
        assert verify_cdf_identity(bsc, [0] * n) < 1e-9

    def test_mixed_block(self, random_channel):
        assert verify_cdf_identity(random_channel, [0, 2, 3, 1, 1]) < 1e-9

    def test_identity_single_jump(self, identity):
        assert verify_cdf_identity(identity, [0, 1, 0]) < 1e-12

    def test_custom_grid(self, bsc):
        assert verify_cdf_identity(bsc, [1, 1, 0], t_grid=[-0.3, 0.0, 0.7]) < 1e-9


class TestCltCheck:
    """Tests for the Gaussian limit of normalized block sums."""

    def test_distance_shrinks(self, bsc):
        (_, small), (_, large) = clt_check(bsc, [16, 4096], samples=20_000, seed=0)
        assert large < small

    def test_gaussian_channel(self, gaussian):
        results = clt_check(gaussian, [64], samples=4000, seed=1)
        assert results[0][1] < 0.05

    @pytest.mark.slow
    def test_gaussian_channel_at_large_n(self, gaussian):
        results = clt_check(gaussian, [1024], samples=100_000, seed=2)
        assert results[0][1] < 0.05

    def test_singular_rejected(self, independent):
        with pytest.raises(SingularChannel):
            clt_check(independent, [16], samples=100, seed=0)
