"""Poisson functional representation sampler.

Encoder and decoder share a stream of proposals (T_i, Y_i): T_i are the
arrival times of a unit-rate Poisson process and Y_i ~ P_Y. Given x, the
encoder sends the index minimizing T_i / r(x|Y_i); the decoder reads Y at
that index. The stream is generated by numpy's Philox counter-based bit
generator keyed by the shared seed, so proposal i can be fetched directly.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from csdlab.core.channel import Channel, DiscreteJointChannel
from csdlab.core.errors import ProposalBudgetExceeded
from csdlab.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_MAX_PROPOSALS = 1_000_000
FIRST_BATCH = 16
MAX_BATCH = 4096
WORDS_PER_PROPOSAL = 4
_MANTISSA_SHIFT = np.uint64(11)
_TWO_POW_M53 = 2.0 ** -53


def _require_discrete(channel: Channel) -> DiscreteJointChannel:
    if not isinstance(channel, DiscreteJointChannel):
        raise TypeError("the sampler supports discrete channels only")
    return channel


@dataclass(frozen=True)
class CommonRandomness:
    """
    Shared proposal stream keyed by a 64-bit seed.

    Proposal i (1-based) uses the Philox block at counter value i; its first
    word drives the exponential inter-arrival time and its second the
    symbol drawn from ``marginal_y`` by inverse CDF.
    """

    seed: int
    marginal_y: Tuple[float, ...]

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @classmethod
    def for_channel(cls, channel: DiscreteJointChannel, seed: int) -> 'CommonRandomness':
        return cls(int(seed), tuple(float(p) for p in channel.marginal_y))

    def _words(self, start: int, count: int) -> np.ndarray:
        bitgen = np.random.Philox(key=int(self.seed), counter=start - 1)
        raw = bitgen.random_raw(WORDS_PER_PROPOSAL * count)
        return raw.reshape(count, WORDS_PER_PROPOSAL)

    def _symbols(self, words: np.ndarray) -> np.ndarray:
        cdf = np.cumsum(self.marginal_y)
        u = (words >> _MANTISSA_SHIFT).astype(np.float64) * _TWO_POW_M53
        return np.minimum(np.searchsorted(cdf, u, side='right'), len(cdf) - 1)

    def proposals(self, start: int, count: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Inter-arrival times and symbols of proposals start .. start+count-1.

        Returns:
            (exponential increments, symbols)
        """
        if start < 1 or count < 1:
            raise ValueError("proposals are indexed from 1")
        words = self._words(start, count)
        u = ((words[:, 0] >> _MANTISSA_SHIFT).astype(np.float64) + 0.5) * _TWO_POW_M53
        return -np.log(u), self._symbols(words[:, 1])

    def symbol(self, index: int) -> int:
        """Y at a single proposal index."""
        if index < 1:
            raise ValueError("index must be at least 1")
        return int(self._symbols(self._words(index, 1)[:, 1])[0])


@dataclass(frozen=True)
class SimulationResult:
    """Encoder output: index N*, decoded symbol, proposals scanned."""

    index: int
    y_out: int
    proposals_examined: int


@dataclass(frozen=True)
class EntropyEstimate:
    """Average of H(N* | Z = z) over seeds, in bits."""

    value: float
    stderr: float
    num_seeds: int


def pfr_encode(
    channel: DiscreteJointChannel,
    x: int,
    z: CommonRandomness,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> SimulationResult:
    """
    Select N* = argmin_i T_i / r(x | Y_i).

    The scan stops once T_i / r_max exceeds the best score so far; no later
    proposal can beat it, so the returned index is the true argmin.

    Raises:
        ProposalBudgetExceeded: If certification needs more than
            ``max_proposals`` proposals
    """
    _require_discrete(channel)
    channel._check_x(x)
    ratios = channel.ratio[int(x)]
    r_max = float(ratios.max())

    best_score = math.inf
    best_index = 0
    elapsed = 0.0
    start = 1
    batch = FIRST_BATCH
    while start <= max_proposals:
        count = min(batch, max_proposals - start + 1)
        increments, symbols = z.proposals(start, count)
        times = elapsed + np.cumsum(increments)
        rho = ratios[symbols]
        with np.errstate(divide='ignore'):
            scores = np.where(rho > 0, times / rho, math.inf)

        k = int(np.argmin(scores))
        if scores[k] < best_score:
            best_score = float(scores[k])
            best_index = start + k

        certified = np.nonzero(times / r_max > best_score)[0]
        if certified.size:
            examined = start + int(certified[0])
            return SimulationResult(best_index, z.symbol(best_index), examined)

        elapsed = float(times[-1])
        start += count
        batch = min(2 * batch, MAX_BATCH)

    raise ProposalBudgetExceeded(
        f"argmin not certified within {max_proposals} proposals (x={x})"
    )


def pfr_decode(index: int, z: CommonRandomness) -> int:
    """Decoder half: the symbol at the transmitted index."""
    return z.symbol(index)


def derive_seeds(seed0: int, count: int) -> np.ndarray:
    """Deterministic 64-bit seeds for ``count`` independent tasks."""
    rng = np.random.default_rng(seed0)
    return rng.integers(0, 2 ** 64, size=count, dtype=np.uint64)


def _index_entropy(channel: DiscreteJointChannel, seed: int, max_proposals: int) -> float:
    z = CommonRandomness.for_channel(channel, seed)
    pmf = {}
    for x in range(channel.n_x):
        index = pfr_encode(channel, x, z, max_proposals).index
        pmf[index] = pmf.get(index, 0.0) + float(channel.marginal_x[x])
    masses = np.array(list(pmf.values()))
    return float(-math.fsum(masses * np.log2(masses)))


def conditional_index_entropy(
    channel: DiscreteJointChannel,
    num_seeds: int,
    seed0: int,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
    workers: Optional[int] = None,
) -> EntropyEstimate:
    """
    Estimate H(N* | Z) by exact per-seed index pmfs.

    For each seed z, every x is encoded and the pmf of N* given z is the
    P_X-weighted law of the resulting indices.
    """
    _require_discrete(channel)
    if num_seeds < 100:
        raise ValueError("num_seeds must be at least 100")
    seeds = derive_seeds(seed0, num_seeds)
    values = np.array(
        parallel_map(lambda s: _index_entropy(channel, int(s), max_proposals), seeds, workers)
    )
    stderr = float(np.std(values, ddof=1) / math.sqrt(num_seeds))
    logger.info("H(N*|Z) = %.4f +/- %.4f bits over %d seeds", values.mean(), stderr, num_seeds)
    return EntropyEstimate(math.fsum(values) / num_seeds, stderr, num_seeds)


def _empirical_joint(
    channel: DiscreteJointChannel, samples: int, seed: int, max_proposals: int
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    xs = rng.choice(channel.n_x, size=samples, p=channel.marginal_x)
    seeds = rng.integers(0, 2 ** 64, size=samples, dtype=np.uint64)
    marginal_y = tuple(float(p) for p in channel.marginal_y)
    counts = np.zeros(channel.joint.shape, dtype=np.int64)
    for x, s in zip(xs, seeds):
        result = pfr_encode(channel, int(x), CommonRandomness(int(s), marginal_y), max_proposals)
        counts[x, result.y_out] += 1
    return counts / samples


def total_variation(channel: DiscreteJointChannel, empirical: np.ndarray) -> float:
    return 0.5 * float(np.abs(empirical - channel.joint).sum())


def exactness_test(
    channel: DiscreteJointChannel,
    samples: int,
    seed: int,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> float:
    """Total-variation distance between simulated and true joint laws."""
    _require_discrete(channel)
    if samples < 10_000:
        raise ValueError("samples must be at least 10^4")
    return total_variation(channel, _empirical_joint(channel, samples, seed, max_proposals))


def tv_ladder(
    channel: DiscreteJointChannel,
    sizes: Sequence[int],
    replicates: int,
    seed: int,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> List[float]:
    """Mean TV distance at each sample size, averaged over replicates."""
    _require_discrete(channel)
    means = []
    for i, size in enumerate(sizes):
        seeds = derive_seeds(seed + i, replicates)
        distances = [
            total_variation(channel, _empirical_joint(channel, int(size), int(s), max_proposals))
            for s in seeds
        ]
        means.append(math.fsum(distances) / replicates)
    return means
