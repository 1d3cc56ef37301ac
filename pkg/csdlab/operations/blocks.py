"""Exact block divergences for i.i.d. product channels.

Given a y-block, the law of S = sum_i ln r(X_i|y_i) under the product
prior is a finite distribution obtained by convolving per-letter level
laws. Masses are carried in log space so that blocks of several thousand
letters neither underflow nor overflow; levels with zero ratio live in an
explicit bucket.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import kstest

from csdlab.core.channel import (
    LOG2E,
    Channel,
    DiscreteJointChannel,
    GaussianChannel,
    llr_stats,
    mutual_information,
)
from csdlab.core.errors import BlockTooLarge, SingularChannel, SymmetryRequired
from csdlab.operations.divergence import WidthFunction, merge_starts
from csdlab.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_LEVEL_CAP = 2_000_000
SYMMETRY_TRIALS = 10
SYMMETRY_BLOCK = 6
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LevelDistribution:
    """
    Exact law of S = sum of per-letter log-ratios over a block.

    Attributes:
        levels: Ascending finite levels in nats
        log_prior: ln P_X^n[S = level]
        log_post: ln P_{X|Y}^n[S = level]
        log_zero_prior: ln of the prior mass with ratio 0 (S = -inf)
        n: Block length
    """

    levels: np.ndarray
    log_prior: np.ndarray
    log_post: np.ndarray
    log_zero_prior: float
    n: int

    @property
    def masses_prior(self) -> np.ndarray:
        return np.exp(self.log_prior)

    @property
    def masses_post(self) -> np.ndarray:
        return np.exp(self.log_post)

    @property
    def zero_ratio_mass(self) -> float:
        return math.exp(self.log_zero_prior)

    def same_as(self, other: 'LevelDistribution') -> bool:
        """Bit-for-bit equality."""
        return (
            self.n == other.n
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.log_prior, other.log_prior)
            and np.array_equal(self.log_post, other.log_post)
            and self.log_zero_prior == other.log_zero_prior
        )

    def width_function(self) -> WidthFunction:
        """Linear-scale width function; only meaningful for short blocks."""
        ratios = np.exp(self.levels)
        values = np.exp(np.logaddexp.accumulate(self.log_prior[::-1])[::-1])
        target = np.exp(np.logaddexp.accumulate(self.log_post[::-1])[::-1])
        return WidthFunction(ratios, values, target)


@dataclass(frozen=True)
class BlockEstimate:
    """E_{Y^n}[D_CS] in bits with its Monte-Carlo standard error."""

    value: float
    stderr: float
    mode: str
    samples: int = 0
    seed: Optional[int] = None


@dataclass(frozen=True)
class RedundancyCurvePoint:
    """One blocklength of the redundancy curve, quantities in bits."""

    n: int
    expected_dcs: float
    block_mi: float
    gap: float
    gap_over_lbn: Optional[float]
    stderr: float = 0.0
    mode: str = 'exact'
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _letter_law(channel: DiscreteJointChannel, y: int):
    levels, prior, post, zero_mass = channel.slice_levels(y)
    order = np.argsort(levels, kind='stable')
    levels = levels[order]
    starts = merge_starts(levels)
    log_zero = math.log(zero_mass) if zero_mass > 0 else -math.inf
    return (
        levels[starts],
        np.logaddexp.reduceat(np.log(prior[order]), starts),
        np.logaddexp.reduceat(np.log(post[order]), starts),
        log_zero,
    )


def _point_mass(n: int = 0) -> LevelDistribution:
    return LevelDistribution(np.zeros(1), np.zeros(1), np.zeros(1), -math.inf, n)


def _convolve(dist: LevelDistribution, letter, cap: int) -> LevelDistribution:
    lv, lp, lq, lz = letter
    levels = (dist.levels[:, np.newaxis] + lv[np.newaxis, :]).ravel()
    log_prior = (dist.log_prior[:, np.newaxis] + lp[np.newaxis, :]).ravel()
    log_post = (dist.log_post[:, np.newaxis] + lq[np.newaxis, :]).ravel()

    order = np.argsort(levels, kind='stable')
    levels = levels[order]
    starts = merge_starts(levels)
    if starts.size > cap:
        raise BlockTooLarge(f"level support {starts.size} exceeds cap {cap}")

    log_zero = np.logaddexp(dist.log_zero_prior, logsumexp(dist.log_prior) + lz)
    return LevelDistribution(
        levels[starts],
        np.logaddexp.reduceat(log_prior[order], starts),
        np.logaddexp.reduceat(log_post[order], starts),
        float(log_zero),
        dist.n + 1,
    )


def extend_level_distribution(
    dist: LevelDistribution,
    channel: DiscreteJointChannel,
    y_block: Sequence[int],
    cap: int = DEFAULT_LEVEL_CAP,
) -> LevelDistribution:
    """Convolve further letters into an existing block law."""
    letters: Dict[int, tuple] = {}
    for y in sorted(int(v) for v in y_block):
        if y not in letters:
            letters[y] = _letter_law(channel, y)
        dist = _convolve(dist, letters[y], cap)
    return dist


def block_level_distribution(
    channel: DiscreteJointChannel, y_block: Sequence[int], cap: int = DEFAULT_LEVEL_CAP
) -> LevelDistribution:
    """
    Exact law of the block log-ratio sum.

    Letters are convolved in sorted y order, so any permutation of the
    block gives a bit-identical result.

    Raises:
        BlockTooLarge: If the merged support exceeds ``cap`` levels
    """
    y_block = list(y_block)
    if not y_block:
        raise ValueError("y_block must be non-empty")
    for y in y_block:
        channel._check_y(y)
    dist = extend_level_distribution(_point_mass(), channel, y_block, cap)
    logger.debug("block of %d letters has %d levels", dist.n, dist.levels.size)
    return dist


def block_csd(dist: LevelDistribution) -> float:
    """D_CS of the product posterior against the product prior, in bits."""
    levels = dist.levels
    log_w = np.logaddexp.accumulate(dist.log_prior[::-1])[::-1]
    neg_lb_w = np.maximum(-log_w, 0.0) * LOG2E
    previous = np.concatenate(([-np.inf], levels[:-1]))
    log_dh = levels + np.log1p(-np.exp(previous - levels))
    keep = neg_lb_w > 0
    terms = np.exp(log_dh[keep] + log_w[keep] + np.log(neg_lb_w[keep]))
    return math.fsum(terms)


def block_kl(dist: LevelDistribution) -> float:
    """D_KL of the product posterior against the product prior, in bits."""
    return math.fsum(np.exp(dist.log_post) * dist.levels) * LOG2E


def validate_symmetry(channel: DiscreteJointChannel, seed: int = 0) -> bool:
    """
    Check that every y-slice carries the same level law.

    Compares per-letter laws against y = 0, then D_CS of random short
    blocks against the constant block.
    """
    reference = _letter_law(channel, 0)
    for y in range(1, channel.n_y):
        levels, log_prior, _, log_zero = _letter_law(channel, y)
        if levels.size != reference[0].size:
            return False
        if not np.allclose(levels, reference[0], rtol=SYMMETRY_TOL, atol=SYMMETRY_TOL):
            return False
        if not np.allclose(log_prior, reference[1], rtol=SYMMETRY_TOL, atol=SYMMETRY_TOL):
            return False
        if not math.isclose(math.exp(log_zero), math.exp(reference[3]), abs_tol=SYMMETRY_TOL):
            return False

    rng = np.random.default_rng(seed)
    baseline = block_csd(block_level_distribution(channel, [0] * SYMMETRY_BLOCK))
    for _ in range(SYMMETRY_TRIALS):
        block = rng.integers(0, channel.n_y, size=SYMMETRY_BLOCK)
        value = block_csd(block_level_distribution(channel, block))
        if not math.isclose(value, baseline, rel_tol=SYMMETRY_TOL, abs_tol=SYMMETRY_TOL):
            return False
    return True


def _require_symmetry(channel: DiscreteJointChannel) -> None:
    if not channel.symmetric:
        raise SymmetryRequired(f"{channel.name} is not declared symmetric")
    if not validate_symmetry(channel):
        raise SymmetryRequired(f"{channel.name} is declared symmetric but its slices differ")


def expected_block_csd(
    channel: DiscreteJointChannel,
    n: int,
    mode: str = 'exact',
    samples: int = 1000,
    seed: int = 0,
    cap: int = DEFAULT_LEVEL_CAP,
    workers: Optional[int] = None,
) -> BlockEstimate:
    """
    E_{Y^n}[D_CS(P_{X^n|Y^n} || P_X^n)] in bits.

    Args:
        mode: 'exact' for declared-symmetric channels, or 'monte_carlo'
        samples: Number of Y^n draws in Monte-Carlo mode
        seed: Master seed of the Y^n draws

    Raises:
        SymmetryRequired: For exact mode on a channel without symmetry
    """
    if n < 1:
        raise ValueError("n must be positive")
    if mode == 'exact':
        _require_symmetry(channel)
        # Every y-type has the same block law, so the multinomial average
        # over types is the value of any single block.
        value = block_csd(block_level_distribution(channel, [0] * n, cap))
        return BlockEstimate(value, 0.0, 'exact')
    if mode != 'monte_carlo':
        raise ValueError(f"unknown mode: {mode}")
    if samples < 1:
        raise ValueError("samples must be at least 1")

    rng = np.random.default_rng([seed, n])
    counts = rng.multinomial(n, channel.marginal_y, size=samples)
    types, inverse = np.unique(counts, axis=0, return_inverse=True)
    logger.debug("n=%d: %d draws cover %d y-types", n, samples, len(types))

    def evaluate(type_counts) -> float:
        block = np.repeat(np.arange(channel.n_y), type_counts)
        return block_csd(block_level_distribution(channel, block, cap))

    per_type = np.array(parallel_map(evaluate, list(types), workers))
    values = per_type[np.ravel(inverse)]
    stderr = float(np.std(values, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return BlockEstimate(math.fsum(values) / samples, stderr, 'monte_carlo', samples, seed)


def _check_n_list(n_list: Sequence[int]) -> List[int]:
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ValueError("n_list must be non-empty")
    if n_list[0] < 1 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be positive and strictly increasing")
    return n_list


def _curve_point(n: int, estimate: BlockEstimate, info_bits: float) -> RedundancyCurvePoint:
    block_mi = n * info_bits
    gap = estimate.value - block_mi
    return RedundancyCurvePoint(
        n=n,
        expected_dcs=estimate.value,
        block_mi=block_mi,
        gap=gap,
        gap_over_lbn=gap / math.log2(n) if n >= 2 else None,
        stderr=estimate.stderr,
        mode=estimate.mode,
        seed=estimate.seed,
    )


def redundancy_curve(
    channel: DiscreteJointChannel,
    n_list: Sequence[int],
    mode: str = 'exact',
    samples: int = 1000,
    seed: int = 0,
    cap: int = DEFAULT_LEVEL_CAP,
    workers: Optional[int] = None,
) -> List[RedundancyCurvePoint]:
    """
    Redundancy gap E[D_CS] - nI for each blocklength in ``n_list``.

    Exact mode grows one constant block through the increasing n_list, so
    the cost is that of the largest n.
    """
    n_list = _check_n_list(n_list)
    info_bits = mutual_information(channel)

    if mode == 'exact':
        _require_symmetry(channel)
        points = []
        dist = _point_mass()
        for n in n_list:
            dist = extend_level_distribution(dist, channel, [0] * (n - dist.n), cap)
            estimate = BlockEstimate(block_csd(dist), 0.0, 'exact')
            points.append(_curve_point(n, estimate, info_bits))
            logger.info("n=%d gap=%.6f bits", n, points[-1].gap)
        return points

    def evaluate(n: int) -> RedundancyCurvePoint:
        estimate = expected_block_csd(channel, n, 'monte_carlo', samples, seed, cap)
        return _curve_point(n, estimate, info_bits)

    return parallel_map(evaluate, n_list, workers)


def redundancy_slope(points: Sequence[RedundancyCurvePoint]) -> float:
    """Least-squares slope of gap against lb n."""
    lbn = np.log2([p.n for p in points])
    gaps = np.array([p.gap for p in points])
    return float(np.polyfit(lbn, gaps, 1)[0])


def verify_cdf_identity(
    channel: DiscreteJointChannel, y_block: Sequence[int], t_grid=None
) -> float:
    """
    Compare two exact expressions for P[sqrt(n)(ln H_n - b) <= t | y^n].

    The left side integrates the density e^u w(e^u) of ln H_n. The right
    side is 1 - L(t) - integral over [t, inf) of e^{-s(eta - t)} dL(eta),
    where L(t) = P_post[S >= s t + b]; a finite sum over posterior levels.

    Returns:
        Largest absolute discrepancy over ``t_grid``
    """
    dist = block_level_distribution(channel, y_block)
    t_grid = np.linspace(-5.0, 5.0, 100) if t_grid is None else np.asarray(t_grid, float)
    s = math.sqrt(dist.n)
    b = math.fsum(np.exp(dist.log_post) * dist.levels)
    tau = b + s * t_grid[:, np.newaxis]

    levels = dist.levels[np.newaxis, :]
    previous = np.concatenate(([-np.inf], dist.levels[:-1]))[np.newaxis, :]
    log_w = np.logaddexp.accumulate(dist.log_prior[::-1])[::-1][np.newaxis, :]
    active = previous < tau
    upper = np.exp(log_w + np.minimum(levels, tau))
    lower = np.exp(log_w + previous)
    left = np.where(active, upper - lower, 0.0).sum(axis=1)

    post = np.exp(dist.log_post)[np.newaxis, :]
    below = np.where(levels < tau, post, 0.0).sum(axis=1)
    above = np.where(levels >= tau, post * np.exp(np.minimum(tau - levels, 0.0)), 0.0)
    right = below + above.sum(axis=1)
    return float(np.max(np.abs(left - right)))


def _normalized_sums(channel: Channel, n: int, samples: int, rng) -> np.ndarray:
    total = np.zeros(samples)
    if isinstance(channel, GaussianChannel):
        post_std = math.sqrt(channel.posterior_var)
        for _ in range(n):
            y = rng.normal(0.0, channel.sigma_y, size=samples)
            x = channel.gain * y + post_std * rng.standard_normal(samples)
            total += channel.log_ratio(x, y) - channel.kappa(y)
        return total / math.sqrt(n)

    counts_y = rng.multinomial(n, channel.marginal_y, size=samples)
    for y in range(channel.n_y):
        levels = channel.log_ratio[:, y]
        post = channel.posterior[:, y]
        on = post > 0
        kappa = math.fsum(post[on] * levels[on])
        centered = np.where(on, levels - kappa, 0.0)
        counts_x = rng.multinomial(counts_y[:, y], post)
        total += counts_x @ centered
    return total / math.sqrt(n)


def clt_check(
    channel: Channel, n_list: Sequence[int], samples: int, seed: int
) -> List[Tuple[int, float]]:
    """
    Kolmogorov-Smirnov distance of sum_i (ln r - kappa_{Y_i}) / sqrt(n) to
    its Gaussian limit N(0, E_Y[sigma_Y^2]), for each n.

    Raises:
        SingularChannel: If E_Y[sigma_Y^2] is zero
    """
    n_list = _check_n_list(n_list)
    limit_var = llr_stats(channel).expected_conditional_variance
    if limit_var <= 0:
        raise SingularChannel("conditional log-ratio variance is zero")
    sd = math.sqrt(limit_var)

    results = []
    for index, n in enumerate(n_list):
        rng = np.random.default_rng([seed, index])
        values = _normalized_sums(channel, n, samples, rng)
        distance = float(kstest(values, 'norm', args=(0.0, sd)).statistic)
        logger.debug("n=%d KS=%.5f", n, distance)
        results.append((n, distance))
    return results
