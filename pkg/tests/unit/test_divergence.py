"""Tests for width functions and the channel simulation divergence."""

import math

import numpy as np
import pytest

from csdlab.core.channel import LOG2E, Normal
from csdlab.core.errors import AbsoluteContinuityViolation
from csdlab.operations.divergence import (
    channel_simulation_divergence,
    divergence_gap,
    expected_channel_csd,
    kl_divergence,
    monte_carlo_csd,
    simpson,
    slice_report,
    width_function,
)

UNIFORM = np.array([0.5, 0.5])
DELTA = np.array([1.0, 0.0])


def dirichlet_pairs(count, seed=11):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        size = int(rng.integers(1, 17))
        p = rng.dirichlet(np.ones(size))
        q = rng.dirichlet(np.full(size, 0.5))
        yield p, q


class TestWidthFunction:
    """Tests for w_P(h) = P[r >= h]."""

    def test_equal_pair_single_level(self):
        w = width_function(UNIFORM, UNIFORM)
        assert w.levels == pytest.approx([1.0])
        assert w(np.array([0.5, 1.0, 1.5])) == pytest.approx([1.0, 1.0, 0.0])

    def test_point_mass_target(self):
        w = width_function(UNIFORM, DELTA)
        assert w.levels == pytest.approx([2.0])
        assert w(np.array([1e-9, 2.0, 2.1])) == pytest.approx([0.5, 0.5, 0.0])
        assert w.integral() == pytest.approx(1.0)

    def test_nonpositive_h_gives_one(self):
        w = width_function(UNIFORM, DELTA)
        assert w(np.array([-1.0, 0.0])) == pytest.approx([1.0, 1.0])

    def test_bsc_slice_levels(self, bsc):
        w = width_function(bsc.marginal_x, bsc.posterior[:, 0])
        assert w.levels == pytest.approx([0.22, 1.78])
        assert w.values == pytest.approx([1.0, 0.5])
        assert w.target_values == pytest.approx([1.0, 0.89])

    def test_integral_of_width_is_one(self):
        for p, q in dirichlet_pairs(20):
            assert width_function(p, q).integral() == pytest.approx(1.0, abs=1e-12)

    def test_absolute_continuity(self):
        with pytest.raises(AbsoluteContinuityViolation):
            width_function(np.array([1.0, 0.0]), UNIFORM)

    def test_mismatched_alphabets(self):
        with pytest.raises(ValueError):
            width_function(UNIFORM, np.array([0.2, 0.3, 0.5]))

    def test_normal_pair_is_monotone(self):
        w = width_function(Normal(0.0, 1.0), Normal(0.3, 0.5))
        values = w(np.linspace(0.0, 5.0, 200))
        assert np.all(np.diff(values) <= 1e-12)
        assert values[0] == pytest.approx(1.0)


class TestChannelSimulationDivergence:
    """Tests for D_CS."""

    def test_equal_pair(self):
        assert channel_simulation_divergence(UNIFORM, UNIFORM) == pytest.approx(0.0, abs=1e-15)

    def test_point_mass(self):
        assert channel_simulation_divergence(UNIFORM, DELTA) == pytest.approx(1.0)

    def test_bsc_slice(self, bsc):
        value = channel_simulation_divergence(bsc.marginal_x, bsc.posterior[:, 1])
        assert value == pytest.approx(0.78, abs=1e-12)

    def test_zero_only_for_equal_pairs(self):
        for p, q in dirichlet_pairs(100, seed=9):
            assert channel_simulation_divergence(p, p) == pytest.approx(0.0, abs=1e-12)
            if not np.allclose(p, q):
                assert channel_simulation_divergence(p, q) > 0

    def test_never_below_kl(self):
        for p, q in dirichlet_pairs(100, seed=5):
            report = divergence_gap(p, q)
            assert report.d_cs >= report.d_kl_direct - 1e-9


class TestKlDivergence:
    """Tests for the direct and integral KL forms."""

    def test_equal_pair(self):
        for method in ('direct', 'integral'):
            assert kl_divergence(UNIFORM, UNIFORM, method) == pytest.approx(0.0, abs=1e-12)

    def test_point_mass(self):
        for method in ('direct', 'integral'):
            assert kl_divergence(UNIFORM, DELTA, method) == pytest.approx(1.0, abs=1e-12)

    def test_methods_agree(self):
        for p, q in dirichlet_pairs(50):
            direct = kl_divergence(p, q, 'direct')
            integral = kl_divergence(p, q, 'integral')
            assert abs(direct - integral) < 1e-9

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            kl_divergence(UNIFORM, DELTA, 'numeric')


class TestDivergenceGap:
    """Tests for D_CS - D_KL = h(ln H) - lb e."""

    def test_equal_pair(self):
        report = divergence_gap(UNIFORM, UNIFORM)
        assert report.gap == pytest.approx(0.0, abs=1e-12)
        assert report.log_width_entropy == pytest.approx(LOG2E)

    def test_point_mass(self):
        report = divergence_gap(UNIFORM, DELTA)
        assert report.gap == pytest.approx(0.0, abs=1e-12)
        assert abs(report.identity_residual) < 1e-9

    def test_identity_on_random_pairs(self):
        for p, q in dirichlet_pairs(50, seed=3):
            assert abs(divergence_gap(p, q).identity_residual) < 1e-9

    def test_report_to_dict(self):
        data = divergence_gap(UNIFORM, DELTA).to_dict()
        assert set(data) == {'d_cs', 'd_kl_direct', 'd_kl_integral', 'gap', 'log_width_entropy'}


class TestNormalPairs:
    """Tests for the Gaussian quadrature path."""

    def test_kl_closed_form_matches_integral(self):
        report = divergence_gap(Normal(0.0, 1.0), Normal(0.4, 0.6))
        assert report.d_kl_integral == pytest.approx(report.d_kl_direct, abs=1e-6)

    def test_identity_holds(self):
        report = divergence_gap(Normal(0.0, 1.0), Normal(-0.7, 0.3))
        assert abs(report.identity_residual) < 1e-6
        assert report.d_cs >= report.d_kl_direct - 1e-6

    def test_equal_normals(self):
        report = divergence_gap(Normal(1.0, 2.0), Normal(1.0, 2.0))
        assert report.d_cs == 0.0
        assert report.log_width_entropy == pytest.approx(LOG2E)

    def test_wider_target_rejected(self):
        with pytest.raises(ValueError):
            divergence_gap(Normal(0.0, 1.0), Normal(0.0, 2.0))

    def test_mixed_pair_rejected(self):
        with pytest.raises(TypeError):
            divergence_gap(Normal(0.0, 1.0), UNIFORM)

    @pytest.mark.slow
    def test_monte_carlo_oracle(self):
        prior, target = Normal(0.0, 1.0), Normal(0.5, 0.7)
        exact = channel_simulation_divergence(prior, target)
        estimate, stderr = monte_carlo_csd(prior, target, samples=1_000_000, seed=4)
        assert abs(estimate - exact) < 3 * stderr


class TestSimpson:
    """Tests for the adaptive Simpson rule."""

    def test_polynomial_is_exact(self):
        assert simpson(lambda x: x ** 3 - x, 0.0, 2.0) == pytest.approx(2.0, abs=1e-12)

    def test_empty_interval(self):
        assert simpson(np.exp, 1.0, 1.0) == 0.0

    def test_gaussian_integral(self):
        value = simpson(lambda x: np.exp(-x ** 2 / 2), -10.0, 10.0)
        assert value == pytest.approx(math.sqrt(2 * math.pi), abs=1e-7)


class TestChannelAverages:
    """Tests for E_Y[D_CS] and per-slice reports."""

    def test_identity(self, identity):
        assert expected_channel_csd(identity) == pytest.approx(1.0)

    def test_independent(self, independent):
        assert expected_channel_csd(independent) == pytest.approx(0.0, abs=1e-12)

    def test_bsc(self, bsc):
        assert expected_channel_csd(bsc) == pytest.approx(0.78, abs=1e-12)

    def test_slice_report_gaussian(self, gaussian):
        report = slice_report(gaussian, 0.0)
        assert report.d_kl_direct == pytest.approx(0.5 * LOG2E * (math.log(2) - 0.5), abs=1e-12)

    def test_gaussian_expected_csd_exceeds_information(self, gaussian):
        value = expected_channel_csd(gaussian)
        assert value >= 0.5
        assert value == pytest.approx(expected_channel_csd(gaussian, nodes=60), abs=1e-5)
