"""Exponential tilting, typicality and information balls.

For a discrete channel and a conditioning symbol y, the pointwise cumulant

    Lambda(lam, y) = ln sum_x p(x) 1[r(x|y) > 0] exp(lam ln r(x|y))

generates the tilted law Q^lam(x|y) = p(x) 1[r > 0] exp(lam ln r - Lambda).
Lambda' / Lambda'' / Lambda''' are the tilted mean, variance and third
central moment of ln r. Everything here is exact summation over finite
alphabets; block quantities are sums over letters.
"""

import itertools
import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from csdlab.core.channel import (
    LOG2E,
    DiscreteJointChannel,
    is_nonsingular,
    llr_stats,
)
from csdlab.core.errors import (
    BlockTooLarge,
    EmptySet,
    EmptySupport,
    IntervalNotFound,
    InvalidEpsilon,
    RadiusOutOfRange,
    SingularChannel,
)
from csdlab.operations.blocks import block_level_distribution
from csdlab.operations.divergence import merge_starts

logger = logging.getLogger(__name__)

DOMINANCE_TOL = 1e-12
MOMENT_BOUND_TOL = 1e-9
GIBBS_TOL = 1e-12
THRESHOLD_RTOL = 1e-10
MAX_ENUMERATION = 2 ** 16
DEFAULT_GRID_RESOLUTION = 1e-3
DEFAULT_BISECTION_TOL = 1e-10
VARIANCE_FLOOR = 0.5


@dataclass(frozen=True)
class CumulantData:
    """Lambda(lam, y) and its first three derivatives, in nats."""

    lam: float
    y: int
    value: float
    d1: float
    d2: float
    d3: float


@dataclass(frozen=True, eq=False)
class TiltedMeasure:
    """Q^lam(.|y) as a pmf over the whole x alphabet."""

    lam: float
    y: int
    pmf: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.pmf > 0)[0]


@dataclass(frozen=True)
class BlockTiltStats:
    """Block sums of tilted variances and third absolute moments."""

    s_n_sq: float
    mu3: float
    lam: float
    y_block: Tuple[int, ...]


@dataclass(frozen=True)
class RegularityConstants:
    """
    Constants of the large-deviations bounds for one channel and epsilon.

    ``M_lo`` can underflow to 0.0 for realistic channels; ``log_M_lo`` keeps
    its value. ``n0`` is the blocklength beyond which gamma > 1/2 holds
    uniformly.
    """

    lambda_lo: float
    lambda_hi: float
    m2_lo: float
    m2_hi: float
    m3_hi: float
    log_M_lo: float
    n0: int
    epsilon: float

    @property
    def M_lo(self) -> float:
        return math.exp(self.log_M_lo) if self.log_M_lo > -745.0 else 0.0

    def to_dict(self) -> dict:
        data = asdict(self)
        data['M_lo'] = self.M_lo
        return data


@dataclass(frozen=True)
class ThresholdSet:
    """The set {x^n : (1/n) sum ln r(x_i|y_i) >= radius}."""

    radius: float


Subset = Union[None, ThresholdSet, np.ndarray, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class TypicalityReport:
    """Membership of one y-block in each atypicality event."""

    mean_value: float
    mean_event: bool
    abs_events: Dict[Tuple[int, float], bool]
    raw_events: Dict[Tuple[int, float], bool]

    @property
    def atypical(self) -> bool:
        return (
            self.mean_event
            or any(self.abs_events.values())
            or any(self.raw_events.values())
        )

    def to_dict(self) -> dict:
        def flatten(events):
            return [{'j': j, 'lambda': lam, 'event': flag} for (j, lam), flag in events.items()]

        return {
            'mean_value': self.mean_value,
            'mean_event': self.mean_event,
            'abs_events': flatten(self.abs_events),
            'raw_events': flatten(self.raw_events),
            'atypical': self.atypical,
        }


@dataclass(frozen=True)
class TypicalitySweep:
    """Monte-Carlo frequency of atypical y-blocks against C / n."""

    n: int
    samples: int
    frequency: float
    chebyshev_constant: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.frequency <= self.bound

    def to_dict(self) -> dict:
        data = asdict(self)
        data['holds'] = self.holds
        return data


@dataclass(frozen=True)
class GibbsReport:
    """Comparison of a set A with its information ball B."""

    iota_a: float
    iota_b: float
    p_a: float
    p_b: float
    radius: float

    @property
    def holds(self) -> bool:
        return self.iota_b <= self.iota_a + GIBBS_TOL and self.p_b >= self.p_a - GIBBS_TOL

    @property
    def replaces(self) -> bool:
        """P(B) >= P(A) whenever iota(B) <= iota(A); true of every threshold set B."""
        return self.iota_b > self.iota_a or self.p_b >= self.p_a - GIBBS_TOL

    @property
    def whole_space(self) -> bool:
        """B carries all the prior mass; the comparison says nothing about A."""
        return self.p_b >= 1.0 - GIBBS_TOL

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class BallBoundReport:
    """Exact ball probability against its large-deviations bound (logs in nats)."""

    radius: float
    lambda_star: float
    log_p_ball: float
    log_bound: float

    @property
    def p_ball(self) -> float:
        return math.exp(self.log_p_ball)

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound)

    @property
    def slack_bits(self) -> float:
        return (self.log_bound - self.log_p_ball) * LOG2E

    @property
    def holds(self) -> bool:
        return self.log_p_ball <= self.log_bound

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(slack_bits=self.slack_bits, holds=self.holds)
        return data


# -- single-letter tilting ----------------------------------------------------


def _slice(channel: DiscreteJointChannel, y: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    channel._check_y(y)
    support = channel.support(y)
    if support.size == 0:
        raise EmptySupport(f"r(.|{y}) vanishes everywhere")
    return support, channel.log_ratio[support, y], np.log(channel.marginal_x[support])


def _tilt(log_prior: np.ndarray, levels: np.ndarray, lambdas: np.ndarray):
    logits = log_prior[np.newaxis, :] + lambdas[:, np.newaxis] * levels[np.newaxis, :]
    values = logsumexp(logits, axis=1)
    return values, np.exp(logits - values[:, np.newaxis])


def cumulant(channel: DiscreteJointChannel, lam: float, y: int) -> CumulantData:
    """Exact Lambda(lam, y) and its derivatives as tilted central moments."""
    _, levels, log_prior = _slice(channel, y)
    values, q = _tilt(log_prior, levels, np.array([float(lam)]))
    q = q[0]
    d1 = math.fsum(q * levels)
    centered = levels - d1
    return CumulantData(
        lam=float(lam),
        y=int(y),
        value=float(values[0]),
        d1=d1,
        d2=math.fsum(q * centered ** 2),
        d3=math.fsum(q * centered ** 3),
    )


def tilted_measure(channel: DiscreteJointChannel, lam: float, y: int) -> TiltedMeasure:
    """Q^lam(.|y) over the full x alphabet."""
    support, levels, log_prior = _slice(channel, y)
    _, q = _tilt(log_prior, levels, np.array([float(lam)]))
    pmf = np.zeros(channel.n_x)
    pmf[support] = q[0]
    return TiltedMeasure(float(lam), int(y), pmf)


class _MomentTable:
    """Tilted moments for every y on a grid of lambdas, arrays of shape (grid, |Y|)."""

    def __init__(self, channel: DiscreteJointChannel, lambdas, max_power: int = 6):
        self.lambdas = np.atleast_1d(np.asarray(lambdas, dtype=np.float64))
        shape = (self.lambdas.size, channel.n_y)
        self.mean = np.zeros(shape)
        self.var = np.zeros(shape)
        self.abs = {k: np.zeros(shape) for k in range(1, max_power + 1)}
        self.raw = {k: np.zeros(shape) for k in range(1, max_power + 1)}
        for y in range(channel.n_y):
            _, levels, log_prior = _slice(channel, y)
            _, q = _tilt(log_prior, levels, self.lambdas)
            mean = q @ levels
            self.mean[:, y] = mean
            self.var[:, y] = np.einsum('gm,gm->g', q, (levels[np.newaxis, :] - mean[:, np.newaxis]) ** 2)
            for k in self.abs:
                self.abs[k][:, y] = q @ np.abs(levels) ** k
                self.raw[k][:, y] = q @ levels ** k
        self.weights = np.asarray(channel.marginal_y)

    def expected(self, array: np.ndarray) -> np.ndarray:
        """E_Y of a per-(lambda, y) table, one value per lambda."""
        return array @ self.weights


def block_tilt_stats(
    channel: DiscreteJointChannel, lam: float, y_block: Sequence[int]
) -> BlockTiltStats:
    """Sum over letters of tilted variance and E|ln r|^3."""
    y_block = tuple(int(y) for y in y_block)
    if not y_block:
        raise ValueError("y_block must be non-empty")
    for y in y_block:
        channel._check_y(y)
    table = _MomentTable(channel, [lam], max_power=3)
    counts = np.bincount(y_block, minlength=channel.n_y)
    s_n_sq = math.fsum(counts * table.var[0])
    mu3 = math.fsum(counts * table.abs[3][0])
    return BlockTiltStats(s_n_sq, mu3, float(lam), y_block)


def stochastic_dominance_check(
    channel: DiscreteJointChannel, y: int, lambda1: float, lambda2: float
) -> Tuple[bool, float]:
    """
    Check Q^lambda2[ln r >= a] >= Q^lambda1[ln r >= a] at every level a.

    Returns:
        (holds, smallest margin of the two tail probabilities)
    """
    if not lambda1 < lambda2:
        raise ValueError("lambda1 must be smaller than lambda2")
    _, levels, log_prior = _slice(channel, y)
    order = np.argsort(levels, kind='stable')
    starts = merge_starts(levels[order])
    _, q = _tilt(log_prior[order], levels[order], np.array([lambda1, lambda2]))
    tails = np.cumsum(np.add.reduceat(q, starts, axis=1)[:, ::-1], axis=1)
    margin = float(np.min(tails[1] - tails[0]))
    return margin >= -DOMINANCE_TOL, margin


def moment_bound_check(
    channel: DiscreteJointChannel, y: int, k: int, lambda_grid: Sequence[float]
) -> bool:
    """Check that E_{Q^lam}|ln r|^k on the grid is bounded by its endpoint sum."""
    if k not in range(1, 7):
        raise ValueError("k must lie in 1..6")
    grid = np.sort(np.asarray(lambda_grid, dtype=np.float64))
    if grid.size == 0:
        raise ValueError("lambda_grid must be non-empty")
    table = _MomentTable(channel, grid, max_power=k)
    moments = table.abs[k][:, int(y)]
    return bool(moments.max() <= moments[0] + moments[-1] + MOMENT_BOUND_TOL)


# -- operating interval and constants ------------------------------------------


def find_operating_interval(
    channel: DiscreteJointChannel, grid_resolution: float = DEFAULT_GRID_RESOLUTION
) -> Tuple[float, float]:
    """
    Widest grid interval [1 - k h, 1 + k h] whose expected tilted variance
    stays at or above half its value at lambda = 1.

    Raises:
        SingularChannel: If the variance at lambda = 1 is zero
        IntervalNotFound: If not even one grid step qualifies
    """
    if not 0 < grid_resolution < 0.5:
        raise ValueError("grid_resolution must lie in (0, 0.5)")
    nonsingular, _ = is_nonsingular(channel)
    if not nonsingular:
        raise SingularChannel(f"{channel.name} has zero conditional log-ratio variance")

    steps = np.arange(1, int(math.floor((1.0 - grid_resolution) / grid_resolution)) + 1)
    table = _MomentTable(channel, np.concatenate(([1.0], 1.0 - steps * grid_resolution,
                                                  1.0 + steps * grid_resolution)), max_power=1)
    variance = table.expected(table.var)
    floor = VARIANCE_FLOOR * variance[0]
    if floor <= 0:
        raise SingularChannel("expected tilted variance at lambda = 1 is zero")
    below = variance[1:steps.size + 1]
    above = variance[steps.size + 1:]
    ok = (below >= floor) & (above >= floor)
    bad = np.nonzero(~ok)[0]
    k = int(bad[0]) if bad.size else steps.size
    if k == 0:
        raise IntervalNotFound("variance floor fails one grid step away from 1")
    logger.debug("operating interval half-width %d steps of %g", k, grid_resolution)
    return 1.0 - k * grid_resolution, 1.0 + k * grid_resolution


def k_epsilon_grid(lambda_lo: float, lambda_hi: float, epsilon: float) -> np.ndarray:
    """The grid lambda_lo, lambda_lo + eps, ..., capped by lambda_hi."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    count = int(math.floor((lambda_hi - lambda_lo) / epsilon))
    grid = lambda_lo + epsilon * np.arange(count + 1)
    if lambda_hi - grid[-1] > 1e-12:
        grid = np.append(grid, lambda_hi)
    return grid


def regularity_constants(
    channel: DiscreteJointChannel,
    epsilon: float = 0.01,
    grid_resolution: float = DEFAULT_GRID_RESOLUTION,
) -> RegularityConstants:
    """
    Assemble the uniform moment bounds, M_lo and n0 for typical blocks.

    Upper moment bounds combine the endpoint absolute moments plus the
    typicality slack; the lower variance bound subtracts that slack from
    the smallest expected tilted variance on the interval.

    Raises:
        InvalidEpsilon: If epsilon leaves no positive variance floor
    """
    if epsilon <= 0:
        raise InvalidEpsilon("epsilon must be positive")
    lo, hi = find_operating_interval(channel, grid_resolution)
    half_steps = int(round((hi - 1.0) / grid_resolution))
    grid = 1.0 + grid_resolution * np.arange(-half_steps, half_steps + 1)
    table = _MomentTable(channel, grid, max_power=3)

    def endpoint_bound(k: int) -> float:
        moments = table.expected(table.abs[k])
        return float(moments[0] + moments[-1] + 2 * epsilon)

    u1, u2, u3 = endpoint_bound(1), endpoint_bound(2), endpoint_bound(3)
    m2_hi = u2 + u1 ** 2
    m3_hi = u3 + 3 * u1 * u2 + 2 * u1 ** 3
    m2_lo = float(table.expected(table.var).min()) - 2 * epsilon - m3_hi * epsilon
    if m2_lo <= 0:
        raise InvalidEpsilon(f"epsilon={epsilon} leaves no positive variance floor")

    t_max = 2.0 * hi * math.sqrt(2 * math.pi) * m3_hi / m2_lo
    log_m = (
        math.log1p(2 * t_max)
        + math.log(0.5)
        - math.log(2 * hi * math.sqrt(2 * math.pi * m2_hi))
        - 2 * t_max
    )
    a = 1 + 2 * t_max
    n0 = int(math.ceil((2 * (1 + a ** 2) / (a * lo * math.sqrt(math.e * m2_lo))) ** 2))
    return RegularityConstants(lo, hi, m2_lo, m2_hi, m3_hi, log_m, n0, float(epsilon))


def check_epsilon(channel: DiscreteJointChannel, constants: RegularityConstants) -> bool:
    """
    Verify I + 3 eps <= E_Y Lambda'(lambda_hi) and I - 3 eps >= E_Y Lambda'(lambda_lo).

    Raises:
        InvalidEpsilon: If either inequality fails
    """
    info = llr_stats(channel).mean_i
    eps = constants.epsilon
    table = _MomentTable(channel, [constants.lambda_lo, constants.lambda_hi], max_power=1)
    mean_lo, mean_hi = table.expected(table.mean)
    if info + 3 * eps > mean_hi:
        raise InvalidEpsilon(f"I + 3eps = {info + 3 * eps:.6g} exceeds tilted mean {mean_hi:.6g}")
    if info - 3 * eps < mean_lo:
        raise InvalidEpsilon(f"I - 3eps = {info - 3 * eps:.6g} below tilted mean {mean_lo:.6g}")
    return True


def m_lower(lam: float, s: float, mu3: float, n: float) -> float:
    """M_n(lam, s, mu) for the block Berry-Esseen style tail estimate."""
    t = lam * 2 * math.sqrt(2 * math.pi) * mu3 / s ** 2
    gamma = 1 - (1 + (1 + 2 * t) ** 2) / (lam * (1 + 2 * t) * math.sqrt(math.e) * s)
    return (1 + 2 * t) * gamma * math.sqrt(n) * math.exp(-2 * t) / (
        2 * lam * math.sqrt(2 * math.pi) * s
    )


# -- typicality -----------------------------------------------------------------


def chebyshev_constant(
    channel: DiscreteJointChannel, epsilon: float, lambda_grid: Sequence[float]
) -> float:
    """Union of the Chebyshev bounds of every atypicality event, times n."""
    table = _MomentTable(channel, lambda_grid, max_power=6)
    total = llr_stats(channel).var
    for j in (1, 2, 3):
        total += 2 * math.fsum(table.expected(table.abs[2 * j]))
    return total / epsilon ** 2


def _posterior_means(channel: DiscreteJointChannel) -> np.ndarray:
    return _MomentTable(channel, [1.0], max_power=1).mean[0]


def _event_flags(table: _MomentTable, averages: Dict[int, np.ndarray], kind: Dict, epsilon):
    flags = {}
    for j in (1, 2, 3):
        expected = table.expected(kind[j])
        for g, lam in enumerate(table.lambdas):
            flags[(j, float(lam))] = bool(abs(averages[j][g] - expected[g]) > epsilon)
    return flags


def typicality_check(
    channel: DiscreteJointChannel,
    y_block: Sequence[int],
    epsilon: float,
    lambda_grid: Sequence[float],
    subset: Subset = None,
) -> TypicalityReport:
    """
    Evaluate the atypicality events for one y-block.

    The conditional-mean event uses the posterior mean when ``subset`` is
    None, otherwise the conditional mean over the given set.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    y_block = [int(y) for y in y_block]
    n = len(y_block)
    counts = np.bincount(y_block, minlength=channel.n_y)
    info = llr_stats(channel).mean_i
    if subset is None:
        mean_value = float(counts @ _posterior_means(channel) / n)
    else:
        mean_value = conditional_mean_llr(channel, y_block, subset)

    table = _MomentTable(channel, lambda_grid, max_power=3)
    abs_avg = {j: table.abs[j] @ counts / n for j in (1, 2, 3)}
    raw_avg = {j: table.raw[j] @ counts / n for j in (1, 2, 3)}
    return TypicalityReport(
        mean_value=mean_value,
        mean_event=bool(abs(mean_value - info) > epsilon),
        abs_events=_event_flags(table, abs_avg, table.abs, epsilon),
        raw_events=_event_flags(table, raw_avg, table.raw, epsilon),
    )


def typicality_sweep(
    channel: DiscreteJointChannel,
    n: int,
    epsilon: float,
    lambda_grid: Sequence[float],
    samples: int,
    seed: int,
) -> TypicalitySweep:
    """Estimate P(atypical y-block) by sampling block types."""
    if samples < 1 or n < 1:
        raise ValueError("n and samples must be positive")
    rng = np.random.default_rng([seed, n])
    counts = rng.multinomial(n, channel.marginal_y, size=samples)
    info = llr_stats(channel).mean_i
    atypical = np.abs(counts @ _posterior_means(channel) / n - info) > epsilon

    table = _MomentTable(channel, lambda_grid, max_power=3)
    for kind in (table.abs, table.raw):
        for j in (1, 2, 3):
            averages = counts @ kind[j].T / n
            expected = table.expected(kind[j])
            atypical |= np.any(np.abs(averages - expected) > epsilon, axis=1)

    constant = chebyshev_constant(channel, epsilon, lambda_grid)
    frequency = float(atypical.mean())
    logger.debug("n=%d atypical frequency %.5f vs C/n=%.5f", n, frequency, constant / n)
    return TypicalitySweep(n, samples, frequency, constant, constant / n)


# -- sets, balls and the Gibbs comparison ----------------------------------------


@dataclass(frozen=True, eq=False)
class BlockEnumeration:
    """Every x^n with its prior log-mass and log-ratio sum."""

    xs: np.ndarray
    log_prior: np.ndarray
    sums: np.ndarray

    @property
    def n(self) -> int:
        return self.xs.shape[1]


def enumerate_blocks(channel: DiscreteJointChannel, y_block: Sequence[int]) -> BlockEnumeration:
    """
    List the whole x^n space for a short block.

    Raises:
        BlockTooLarge: If |X|^n exceeds MAX_ENUMERATION
    """
    y_block = [int(y) for y in y_block]
    size = channel.n_x ** len(y_block)
    if size > MAX_ENUMERATION:
        raise BlockTooLarge(f"{size} outcomes exceed the enumeration limit {MAX_ENUMERATION}")
    xs = np.array(list(itertools.product(range(channel.n_x), repeat=len(y_block))), dtype=np.intp)
    log_prior = np.log(channel.marginal_x)[xs].sum(axis=1)
    sums = channel.log_ratio[xs, np.asarray(y_block, dtype=np.intp)].sum(axis=1)
    return BlockEnumeration(xs, log_prior, sums)


def _at_least(values: np.ndarray, threshold: float) -> np.ndarray:
    if not math.isfinite(threshold):
        return values >= threshold
    return values >= threshold - THRESHOLD_RTOL * max(1.0, abs(threshold))


def _membership(enum: BlockEnumeration, subset: Subset) -> np.ndarray:
    if subset is None:
        return np.ones(enum.xs.shape[0], dtype=bool)
    if isinstance(subset, ThresholdSet):
        return _at_least(enum.sums, enum.n * subset.radius)
    if callable(subset):
        mask = np.asarray(subset(enum.xs), dtype=bool)
    else:
        mask = np.asarray(subset, dtype=bool)
    if mask.shape != (enum.xs.shape[0],):
        raise ValueError("subset mask must have one entry per enumerated block")
    return mask


def _set_stats(log_prior: np.ndarray, sums: np.ndarray, mask: np.ndarray, n: int):
    """(prior probability, conditional mean of sum/n) over a mask."""
    if not mask.any():
        raise EmptySet("subset has zero prior mass")
    masses = np.exp(log_prior[mask])
    mass = math.fsum(masses)
    if mass <= 0:
        raise EmptySet("subset has zero prior mass")
    values = sums[mask]
    if np.any(np.isneginf(values)):
        return mass, -math.inf
    return mass, math.fsum(masses * values) / (mass * n)


def conditional_mean_llr(
    channel: DiscreteJointChannel, y_block: Sequence[int], subset: Subset = None
) -> float:
    """
    iota(S) = E[(1/n) sum ln r | X^n in S] under the product prior, in nats.

    Threshold sets and the full space are evaluated through the block level
    law at any n; predicates and masks by exhaustive enumeration.

    Raises:
        EmptySet: If S has zero prior probability
    """
    y_block = [int(y) for y in y_block]
    n = len(y_block)
    if subset is None or isinstance(subset, ThresholdSet):
        dist = block_level_distribution(channel, y_block)
        radius = -math.inf if subset is None else subset.radius
        if radius == -math.inf and dist.log_zero_prior > -math.inf:
            return -math.inf
        mask = _at_least(dist.levels, n * radius)
        return _set_stats(dist.log_prior, dist.levels, mask, n)[1]
    enum = enumerate_blocks(channel, y_block)
    return _set_stats(enum.log_prior, enum.sums, _membership(enum, subset), n)[1]


def ball_radius(iota_a: float, constants: RegularityConstants, n: int) -> float:
    """iota_A - 1 / (M_lo lambda_lo^2 sqrt(m2_lo) n); -inf once the correction overflows."""
    if n <= 0:
        raise ValueError("n must be positive")
    denominator = constants.M_lo * constants.lambda_lo ** 2 * math.sqrt(constants.m2_lo) * n
    if denominator > 0 and math.isfinite(1.0 / denominator):
        return iota_a - 1.0 / denominator
    log_correction = -(
        constants.log_M_lo
        + 2 * math.log(constants.lambda_lo)
        + 0.5 * math.log(constants.m2_lo)
        + math.log(n)
    )
    if log_correction > 700:
        return -math.inf
    return iota_a - math.exp(log_correction)


def gibbs_check(
    channel: DiscreteJointChannel,
    y_block: Sequence[int],
    subset: Subset,
    constants: RegularityConstants,
) -> GibbsReport:
    """
    Compare A with the ball B = {x^n : (1/n) sum ln r >= radius(iota(A))}.

    The check holds when iota(B) <= iota(A) and P(B) >= P(A). Both are
    only guaranteed for n above constants.n0 on typical blocks.
    """
    enum = enumerate_blocks(channel, y_block)
    p_a, iota_a = _set_stats(enum.log_prior, enum.sums, _membership(enum, subset), enum.n)
    return _compare_with_ball(enum, p_a, iota_a, ball_radius(iota_a, constants, enum.n))


def ball_replacement_check(
    channel: DiscreteJointChannel,
    y_block: Sequence[int],
    subset: Subset,
    radius: float,
) -> GibbsReport:
    """
    Compare A with the threshold set B at an explicit radius.

    Whatever the radius, iota(B) <= iota(A) forces P(B) >= P(A); see
    GibbsReport.replaces.
    """
    enum = enumerate_blocks(channel, y_block)
    p_a, iota_a = _set_stats(enum.log_prior, enum.sums, _membership(enum, subset), enum.n)
    return _compare_with_ball(enum, p_a, iota_a, radius)


def _compare_with_ball(enum: BlockEnumeration, p_a: float, iota_a: float, radius: float) -> GibbsReport:
    ball = _at_least(enum.sums, enum.n * radius)
    p_b, iota_b = _set_stats(enum.log_prior, enum.sums, ball, enum.n)
    return GibbsReport(iota_a, iota_b, p_a, p_b, radius)


def ball_probability_bound_check(
    channel: DiscreteJointChannel,
    y_block: Sequence[int],
    constants: RegularityConstants,
    radius: float,
    lambda_solver_tol: float = DEFAULT_BISECTION_TOL,
) -> BallBoundReport:
    """
    Exact P(B) for the ball of a given radius against
    e^{-n radius} n^{-1/2} (1/sqrt(2 pi m2_lo) + m3_hi / m2_lo).

    The tilt solving Lambda'(lam, y^n) = radius is found by bisection on
    [lambda_lo, lambda_hi].

    Raises:
        RadiusOutOfRange: If radius is outside the tilted-mean range
    """
    y_block = [int(y) for y in y_block]
    n = len(y_block)
    counts = np.bincount(y_block, minlength=channel.n_y)

    def derivative(lam: float) -> float:
        return float(_MomentTable(channel, [lam], max_power=1).mean[0] @ counts / n)

    lo, hi = constants.lambda_lo, constants.lambda_hi
    d_lo, d_hi = derivative(lo), derivative(hi)
    if not d_lo < radius < d_hi:
        raise RadiusOutOfRange(f"radius {radius:.6g} outside ({d_lo:.6g}, {d_hi:.6g})")
    while hi - lo > lambda_solver_tol:
        mid = 0.5 * (lo + hi)
        if derivative(mid) < radius:
            lo = mid
        else:
            hi = mid
    lambda_star = 0.5 * (lo + hi)

    dist = block_level_distribution(channel, y_block)
    mask = _at_least(dist.levels, n * radius)
    log_p = float(logsumexp(dist.log_prior[mask])) if mask.any() else -math.inf
    log_bound = (
        -n * radius
        - 0.5 * math.log(n)
        + math.log(1 / math.sqrt(2 * math.pi * constants.m2_lo) + constants.m3_hi / constants.m2_lo)
    )
    logger.debug("n=%d lambda*=%.8f log P(B)=%.4f log bound=%.4f", n, lambda_star, log_p, log_bound)
    return BallBoundReport(radius, lambda_star, log_p, log_bound)
