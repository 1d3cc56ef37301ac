"""Tests for channels and log-likelihood statistics."""

import json
import math

import numpy as np
import pytest

from csdlab.core.channel import (
    LOG2E,
    DiscreteJointChannel,
    GaussianChannel,
    bundled_channel,
    bundled_channel_paths,
    channel_from_spec,
    is_nonsingular,
    llr_stats,
    load_channel,
    log_likelihood_ratio,
    mutual_information,
)
from csdlab.core.errors import ChannelParseError, InvalidChannel

from tests.conftest import random_discrete_channel


class TestConstruction:
    """Tests for DiscreteJointChannel invariants."""

    def test_rejects_negative_entry(self):
        with pytest.raises(InvalidChannel):
            DiscreteJointChannel(np.array([[0.6, -0.1], [0.3, 0.2]]))

    def test_rejects_bad_total(self):
        with pytest.raises(InvalidChannel):
            DiscreteJointChannel(np.array([[0.5, 0.2], [0.2, 0.2]]))

    def test_rejects_zero_marginal(self):
        with pytest.raises(InvalidChannel):
            DiscreteJointChannel(np.array([[0.5, 0.5], [0.0, 0.0]]))

    def test_tables_are_read_only(self, bsc):
        with pytest.raises(ValueError):
            bsc.joint[0, 0] = 0.3

    def test_marginals(self, bsc):
        assert bsc.marginal_x == pytest.approx([0.5, 0.5])
        assert bsc.marginal_y == pytest.approx([0.5, 0.5])

    def test_bsc_constructor_matches_fixture(self, bsc):
        built = DiscreteJointChannel.bsc(0.11)
        assert np.allclose(built.joint, bsc.joint)
        assert built.symmetric

    def test_prior_mean_of_ratio_is_one(self, bsc, identity, random_channel):
        rng = np.random.default_rng(17)
        channels = [bsc, identity, random_channel, random_discrete_channel(rng, 5, 3)]
        for channel in channels:
            assert channel.marginal_x @ channel.ratio == pytest.approx(np.ones(channel.n_y), abs=1e-12)

    def test_gaussian_rejects_zero_noise(self):
        with pytest.raises(InvalidChannel):
            GaussianChannel(1.0, 0.0)


class TestLogLikelihoodRatio:
    """Tests for ln r(x|y)."""

    def test_independent_is_zero(self, independent):
        for x in range(independent.n_x):
            for y in range(independent.n_y):
                assert log_likelihood_ratio(independent, x, y) == pytest.approx(0.0, abs=1e-12)

    def test_identity(self, identity):
        assert log_likelihood_ratio(identity, 0, 0) == pytest.approx(math.log(2))
        assert log_likelihood_ratio(identity, 1, 0) == -math.inf

    def test_bsc_agreement(self, bsc):
        assert log_likelihood_ratio(bsc, 1, 1) == pytest.approx(math.log(2 * 0.89))
        assert log_likelihood_ratio(bsc, 0, 1) == pytest.approx(math.log(2 * 0.11))

    def test_out_of_alphabet(self, bsc):
        with pytest.raises(ValueError):
            log_likelihood_ratio(bsc, 2, 0)

    def test_gaussian_matches_density_ratio(self, gaussian):
        x, y = 0.3, 1.1
        post = gaussian.posterior(y)
        expected = (
            -0.5 * ((x - post.mean) / post.std) ** 2 - math.log(post.std)
            + 0.5 * x ** 2 + math.log(gaussian.sigma_x)
        )
        assert log_likelihood_ratio(gaussian, x, y) == pytest.approx(expected)


class TestMutualInformation:
    """Tests for I(X;Y) in bits."""

    def test_independent(self, independent):
        assert mutual_information(independent) == pytest.approx(0.0, abs=1e-12)

    def test_identity(self, identity):
        assert mutual_information(identity) == pytest.approx(1.0)

    def test_bsc(self, bsc):
        p = 0.11
        h = -p * math.log2(p) - (1 - p) * math.log2(1 - p)
        assert mutual_information(bsc) == pytest.approx(1 - h, abs=1e-12)
        assert mutual_information(bsc) == pytest.approx(0.5, abs=1e-3)

    def test_gaussian(self, gaussian):
        assert mutual_information(gaussian) == pytest.approx(0.5)

    def test_factorized_random_channels(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            px = rng.dirichlet(np.ones(int(rng.integers(2, 7))))
            py = rng.dirichlet(np.ones(int(rng.integers(2, 7))))
            channel = DiscreteJointChannel.independent(px, py)
            assert mutual_information(channel) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.slow
    def test_gaussian_monte_carlo(self, gaussian):
        samples = 1_000_000
        rng = np.random.default_rng(8)
        y = rng.normal(0.0, gaussian.sigma_y, size=samples)
        x = gaussian.gain * y + math.sqrt(gaussian.posterior_var) * rng.standard_normal(samples)
        values = gaussian.log_ratio(x, y) * LOG2E
        stderr = values.std(ddof=1) / math.sqrt(samples)
        assert abs(values.mean() - mutual_information(gaussian)) < 3 * stderr


class TestSingularity:
    """Tests for is_nonsingular."""

    def test_identity_is_singular(self, identity):
        assert is_nonsingular(identity) == (False, None)

    def test_independent_is_singular(self, independent):
        assert is_nonsingular(independent)[0] is False

    def test_bsc_has_witness(self, bsc):
        flag, witness = is_nonsingular(bsc)
        assert flag
        assert witness in (0, 1)

    def test_gaussian_is_nonsingular(self, gaussian):
        assert is_nonsingular(gaussian)[0]


class TestLlrStats:
    """Tests for moments of ln r."""

    def test_independent(self, independent):
        stats = llr_stats(independent)
        assert stats.mean_i == pytest.approx(0.0, abs=1e-12)
        assert stats.var == pytest.approx(0.0, abs=1e-12)

    def test_identity_conditional_variance_vanishes(self, identity):
        stats = llr_stats(identity)
        assert all(v == 0.0 for v in stats.per_y_variance.values())
        assert stats.expected_conditional_variance == 0.0

    def test_bsc_variance_two_ways(self, bsc):
        stats = llr_stats(bsc)
        p = bsc.joint.ravel()
        ell = bsc.log_ratio.ravel()
        second = math.fsum(p * ell ** 2)
        first = math.fsum(p * ell)
        assert stats.var == pytest.approx(second - first ** 2, abs=1e-12)
        assert stats.mean_i == pytest.approx(mutual_information(bsc) * math.log(2))

    def test_gaussian_closed_forms(self, gaussian):
        stats = llr_stats(gaussian)
        assert stats.mean_i == pytest.approx(0.5 * math.log(2))
        assert stats.var == pytest.approx(0.5)
        ys = np.linspace(-8, 8, 4001)
        density = np.exp(-ys ** 2 / (2 * gaussian.sigma_y ** 2))
        density /= density.sum()
        numeric = float(np.sum(density * gaussian.conditional_llr_variance(ys)))
        assert stats.expected_conditional_variance == pytest.approx(numeric, rel=1e-6)


class TestChannelFiles:
    """Tests for channel spec parsing."""

    def test_bundled_fixtures_load(self):
        stems = {path.stem for path in bundled_channel_paths()}
        assert {'independent', 'identity', 'bsc_011', 'bsc_025', 'random_4x4', 'gaussian'} <= stems
        for stem in stems:
            bundled_channel(stem)

    def test_gaussian_spec(self):
        channel = channel_from_spec({'type': 'gaussian', 'sigma_x': 2, 'sigma_n': 1})
        assert isinstance(channel, GaussianChannel)
        assert channel.sigma_y == pytest.approx(math.sqrt(5))

    def test_unknown_type(self):
        with pytest.raises(ChannelParseError):
            channel_from_spec({'type': 'erasure'})

    def test_ragged_rows(self):
        with pytest.raises(ChannelParseError):
            channel_from_spec({'type': 'discrete', 'joint': [[0.5, 0.25], [0.25]]})

    def test_corrupted_file(self, temp_dir):
        path = temp_dir / 'broken.json'
        path.write_text('{"type": "discrete", "joint": [[0.5, 0.5')
        with pytest.raises(ChannelParseError):
            load_channel(path)

    def test_invalid_law_reported_as_parse_error(self, temp_dir):
        path = temp_dir / 'bad.json'
        path.write_text(json.dumps({'type': 'discrete', 'joint': [[0.9, 0.9], [0.1, 0.1]]}))
        with pytest.raises(ChannelParseError):
            load_channel(path)

    def test_missing_bundled_name(self):
        with pytest.raises(ChannelParseError):
            bundled_channel('no_such_channel')
