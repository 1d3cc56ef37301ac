"""Channel models and log-likelihood diagnostics.

Two families are supported:

- ``DiscreteJointChannel``: a finite joint pmf p(x, y), rows indexed by x
  and columns by y.
- ``GaussianChannel``: X ~ N(0, sigma_x^2), Y = X + N(0, sigma_n^2).

All internal quantities are in nats. Functions that report information
quantities (``mutual_information``) convert to bits at the boundary.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.stats import norm

from csdlab.core.errors import ChannelParseError, InvalidChannel

LOG2E = 1.0 / math.log(2.0)

# Entries may be renormalized if the total is off by less than this.
NORMALIZE_TOL = 1e-9

# Two log-ratio values closer than this (relative) count as one level.
LEVEL_RTOL = 1e-12

FIXTURES_DIR = Path(__file__).resolve().parent.parent / 'fixtures'


def same_level(a: float, b: float) -> bool:
    """True if two finite log-ratio levels are equal within LEVEL_RTOL."""
    return abs(a - b) <= LEVEL_RTOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True, eq=False)
class DiscreteJointChannel:
    """
    Finite joint source/channel law p(x, y).

    Construction rejects negative entries, zero-mass rows or columns, and
    totals further than NORMALIZE_TOL from one. Within a y-column,
    p(x|y) = 0 is allowed and means r(x|y) = 0.

    Attributes:
        joint: |X| x |Y| matrix of probabilities
        name: Label used in reports
        symmetric: Declares that every y-slice carries the same multiset of
            (log-ratio, prior mass) pairs; enables exact block averaging
    """

    joint: np.ndarray
    name: str = 'discrete'
    symmetric: bool = False
    marginal_x: np.ndarray = field(init=False, repr=False)
    marginal_y: np.ndarray = field(init=False, repr=False)
    posterior: np.ndarray = field(init=False, repr=False)
    log_ratio: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        joint = np.array(self.joint, dtype=np.float64)
        if joint.ndim != 2 or joint.size == 0:
            raise InvalidChannel("joint must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(joint)) or np.any(joint < 0):
            raise InvalidChannel("joint entries must be finite and non-negative")

        total = math.fsum(joint.ravel())
        if abs(total - 1.0) > NORMALIZE_TOL:
            raise InvalidChannel(f"joint sums to {total!r}, expected 1")
        joint = joint / total

        marginal_x = joint.sum(axis=1)
        marginal_y = joint.sum(axis=0)
        if np.any(marginal_x <= 0):
            raise InvalidChannel("every x must have positive marginal mass")
        if np.any(marginal_y <= 0):
            raise InvalidChannel("every y must have positive marginal mass")

        posterior = joint / marginal_y[np.newaxis, :]
        with np.errstate(divide='ignore'):
            log_ratio = (
                np.log(joint)
                - np.log(marginal_x)[:, np.newaxis]
                - np.log(marginal_y)[np.newaxis, :]
            )

        for array in (joint, marginal_x, marginal_y, posterior, log_ratio):
            array.setflags(write=False)
        object.__setattr__(self, 'joint', joint)
        object.__setattr__(self, 'marginal_x', marginal_x)
        object.__setattr__(self, 'marginal_y', marginal_y)
        object.__setattr__(self, 'posterior', posterior)
        object.__setattr__(self, 'log_ratio', log_ratio)

    @property
    def n_x(self) -> int:
        return self.joint.shape[0]

    @property
    def n_y(self) -> int:
        return self.joint.shape[1]

    @property
    def ratio(self) -> np.ndarray:
        """Likelihood ratio table r(x|y) = p(x|y)/p(x), zero off-support."""
        return np.exp(self.log_ratio)

    def support(self, y: int) -> np.ndarray:
        """Indices x with p(x|y) > 0."""
        return np.nonzero(self.joint[:, y] > 0)[0]

    def slice_levels(self, y: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
        """
        Per-letter level law of ln r(X|y).

        Returns:
            (levels, prior masses, posterior masses, prior mass of r = 0),
            the first three restricted to the support of P_{X|Y=y}
        """
        self._check_y(y)
        on = self.support(y)
        zero_mass = math.fsum(self.marginal_x[self.joint[:, y] == 0])
        return (
            self.log_ratio[on, y],
            self.marginal_x[on],
            self.posterior[on, y],
            zero_mass,
        )

    def _check_y(self, y: int) -> None:
        if not 0 <= int(y) < self.n_y:
            raise ValueError(f"y={y} outside alphabet of size {self.n_y}")

    def _check_x(self, x: int) -> None:
        if not 0 <= int(x) < self.n_x:
            raise ValueError(f"x={x} outside alphabet of size {self.n_x}")

    # -- common constructors ------------------------------------------------

    @classmethod
    def independent(cls, px, py, name: str = 'independent') -> 'DiscreteJointChannel':
        """Product channel p(x)p(y); r is identically 1."""
        return cls(np.outer(px, py), name=name, symmetric=True)

    @classmethod
    def identity(cls, size: int = 2, name: str = 'identity') -> 'DiscreteJointChannel':
        """Uniform X with Y = X."""
        return cls(np.eye(size) / size, name=name, symmetric=True)

    @classmethod
    def bsc(cls, crossover: float, name: Optional[str] = None) -> 'DiscreteJointChannel':
        """Binary symmetric channel with uniform input."""
        if not 0.0 < crossover < 1.0:
            raise InvalidChannel("crossover must lie in (0, 1)")
        p = crossover
        joint = 0.5 * np.array([[1 - p, p], [p, 1 - p]])
        return cls(joint, name=name or f'bsc({p:g})', symmetric=True)


@dataclass(frozen=True)
class Normal:
    """One-dimensional normal law N(mean, std^2)."""

    mean: float
    std: float

    @property
    def var(self) -> float:
        return self.std ** 2


@dataclass(frozen=True)
class GaussianChannel:
    """
    Scalar additive Gaussian channel.

    X ~ N(0, sigma_x^2) and Y = X + N(0, sigma_n^2). The posterior given y
    is N(gain * y, posterior_var).
    """

    sigma_x: float
    sigma_n: float
    name: str = 'gaussian'

    def __post_init__(self):
        for label, value in (('sigma_x', self.sigma_x), ('sigma_n', self.sigma_n)):
            if not (math.isfinite(value) and value > 0):
                raise InvalidChannel(f"{label} must be positive and finite")

    @property
    def sigma_y(self) -> float:
        return math.sqrt(self.sigma_x ** 2 + self.sigma_n ** 2)

    @property
    def gain(self) -> float:
        return self.sigma_x ** 2 / self.sigma_y ** 2

    @property
    def posterior_var(self) -> float:
        return (self.sigma_x * self.sigma_n) ** 2 / self.sigma_y ** 2

    @property
    def prior(self) -> Normal:
        return Normal(0.0, self.sigma_x)

    def posterior(self, y: float) -> Normal:
        return Normal(self.gain * y, math.sqrt(self.posterior_var))

    def log_ratio(self, x, y):
        """ln p(x|y) - ln p(x), vectorized over numpy inputs."""
        post_std = math.sqrt(self.posterior_var)
        return norm.logpdf(x, loc=self.gain * np.asarray(y), scale=post_std) - norm.logpdf(
            x, loc=0.0, scale=self.sigma_x
        )

    def kappa(self, y):
        """KL divergence of the posterior from the prior given y, in nats."""
        v = self.posterior_var
        sx2 = self.sigma_x ** 2
        y = np.asarray(y, dtype=np.float64)
        return 0.5 * (math.log(sx2 / v) + (v + (self.gain * y) ** 2) / sx2 - 1.0)

    def conditional_llr_variance(self, y):
        """Var[ln r(X|y) | Y=y] in nats^2."""
        v = self.posterior_var
        sx2 = self.sigma_x ** 2
        y = np.asarray(y, dtype=np.float64)
        return 0.5 * (1.0 - v / sx2) ** 2 + (self.gain * y) ** 2 * v / sx2 ** 2

    def expected_conditional_variance(self) -> float:
        """E_Y[Var[ln r | Y]] in nats^2."""
        v = self.posterior_var
        sx2 = self.sigma_x ** 2
        return 0.5 * (1.0 - v / sx2) ** 2 + self.gain ** 2 * v * self.sigma_y ** 2 / sx2 ** 2


Channel = Union[DiscreteJointChannel, GaussianChannel]


@dataclass(frozen=True)
class LogLikelihoodStats:
    """
    Moments of ln r under the joint law.

    Attributes:
        mean_i: E[ln r] in nats (mutual information)
        var: Var[ln r] in nats^2
        per_y_variance: y -> Var[ln r | Y=y]; empty for Gaussian channels
        expected_conditional_variance: E_Y of the conditional variance
    """

    mean_i: float
    var: float
    per_y_variance: Dict[int, float]
    expected_conditional_variance: float


def log_likelihood_ratio(channel: Channel, x, y) -> float:
    """
    Log-likelihood ratio ln[p(x|y)/p(x)] in nats.

    Returns -inf for a discrete pair with p(x|y) = 0.
    """
    if isinstance(channel, GaussianChannel):
        return float(channel.log_ratio(x, y))
    channel._check_x(x)
    channel._check_y(y)
    return float(channel.log_ratio[int(x), int(y)])


def mutual_information(channel: Channel) -> float:
    """I(X;Y) in bits."""
    if isinstance(channel, GaussianChannel):
        return 0.5 * math.log2(1.0 + channel.sigma_x ** 2 / channel.sigma_n ** 2)
    on = channel.joint > 0
    return math.fsum((channel.joint[on] * channel.log_ratio[on]).ravel()) * LOG2E


def _slice_is_singular(levels: np.ndarray) -> bool:
    return same_level(float(levels.min()), float(levels.max()))


def is_nonsingular(channel: Channel) -> Tuple[bool, Optional[int]]:
    """
    Decide whether r(.|y) is non-constant on the posterior support for some y.

    Returns:
        (flag, witness y); the witness is None for singular channels and for
        the Gaussian channel, which is always non-singular.
    """
    if isinstance(channel, GaussianChannel):
        return True, None
    for y in range(channel.n_y):
        levels = channel.log_ratio[channel.support(y), y]
        if not _slice_is_singular(levels):
            return True, y
    return False, None


def llr_stats(channel: Channel) -> LogLikelihoodStats:
    """Exact (discrete) or closed-form (Gaussian) moments of ln r."""
    if isinstance(channel, GaussianChannel):
        snr = channel.sigma_x ** 2 / channel.sigma_n ** 2
        return LogLikelihoodStats(
            mean_i=0.5 * math.log1p(snr),
            var=channel.sigma_x ** 2 / channel.sigma_y ** 2,
            per_y_variance={},
            expected_conditional_variance=channel.expected_conditional_variance(),
        )

    on = channel.joint > 0
    p = channel.joint[on]
    ell = channel.log_ratio[on]
    mean = math.fsum(p * ell)
    var = math.fsum(p * (ell - mean) ** 2)

    per_y = {}
    for y in range(channel.n_y):
        levels, _, post, _ = channel.slice_levels(y)
        if _slice_is_singular(levels):
            per_y[y] = 0.0
            continue
        kappa = math.fsum(post * levels)
        per_y[y] = math.fsum(post * (levels - kappa) ** 2)

    expected = math.fsum(channel.marginal_y[y] * per_y[y] for y in per_y)
    return LogLikelihoodStats(mean, var, per_y, expected)


def channel_from_spec(spec: dict) -> Channel:
    """
    Build a channel from its JSON spec.

    Raises:
        ChannelParseError: If the document does not follow the schema
        InvalidChannel: If the parameters violate channel invariants
    """
    if not isinstance(spec, dict):
        raise ChannelParseError("channel spec must be a JSON object")
    kind = spec.get('type')
    name = spec.get('name')
    if kind == 'discrete':
        joint = spec.get('joint')
        if not isinstance(joint, list) or not all(isinstance(row, list) for row in joint):
            raise ChannelParseError("discrete spec needs 'joint' as a list of rows")
        if len({len(row) for row in joint}) != 1:
            raise ChannelParseError("rows of 'joint' must have equal length")
        try:
            matrix = np.array(joint, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ChannelParseError(f"non-numeric joint entry: {exc}") from exc
        return DiscreteJointChannel(
            matrix,
            name=name or 'discrete',
            symmetric=bool(spec.get('symmetric', False)),
        )
    if kind == 'gaussian':
        try:
            sigma_x = float(spec['sigma_x'])
            sigma_n = float(spec['sigma_n'])
        except (KeyError, TypeError, ValueError) as exc:
            raise ChannelParseError(f"gaussian spec needs numeric sigma_x, sigma_n: {exc}") from exc
        return GaussianChannel(sigma_x, sigma_n, name=name or 'gaussian')
    raise ChannelParseError(f"unknown channel type: {kind!r}")


def load_channel(path: Union[str, Path]) -> Channel:
    """
    Load a channel spec file.

    Construction errors are reported as ChannelParseError so that a bad
    file always maps to the parse exit code.
    """
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except OSError as exc:
        raise ChannelParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ChannelParseError(f"{path} is not valid JSON: {exc}") from exc
    try:
        return channel_from_spec(spec)
    except InvalidChannel as exc:
        raise ChannelParseError(f"{path}: {exc}") from exc


def bundled_channel_paths() -> List[Path]:
    """Paths of the channel specs shipped with the package."""
    return sorted(FIXTURES_DIR.glob('*.json'))


def bundled_channel(stem: str) -> Channel:
    """Load a bundled channel by file stem, e.g. ``'bsc_011'``."""
    path = FIXTURES_DIR / f'{stem}.json'
    if not path.exists():
        raise ChannelParseError(f"no bundled channel named {stem!r}")
    return load_channel(path)
