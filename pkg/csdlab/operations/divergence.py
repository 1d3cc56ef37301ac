"""Width functions and the channel simulation divergence.

For a prior P and a target Q << P with likelihood ratio r = dQ/dP, the
P-width function is w_P(h) = P[r(X) >= h]. It integrates to one over
h > 0, so it is the density of an auxiliary variable H, and

    D_CS(Q || P) = -integral of w_P(h) lb w_P(h) dh

Discrete pairs are evaluated exactly, segment by segment. Normal pairs
(the posterior/prior pair of a Gaussian channel) are evaluated by
composite Simpson quadrature in the radius coordinate of the quadratic
log-ratio.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Tuple, Union

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import ndtr, xlogy

from csdlab.core.channel import (
    LOG2E,
    Channel,
    DiscreteJointChannel,
    GaussianChannel,
    Normal,
    NORMALIZE_TOL,
    LEVEL_RTOL,
)
from csdlab.core.errors import AbsoluteContinuityViolation

logger = logging.getLogger(__name__)

Distribution = Union[np.ndarray, list, tuple, Normal]

# Quadrature stops when successive panel halvings agree to this many bits.
QUADRATURE_TOL = 1e-7
# Ignore the region h < e^{TRUNCATION_LOG_LEVEL}; its contribution is < 1e-10.
TRUNCATION_LOG_LEVEL = -28.0
MAX_PANELS = 2 ** 22


def phi(w):
    """-w lb w with 0 lb 0 = 0."""
    return -xlogy(w, w) * LOG2E


def merge_starts(sorted_values: np.ndarray) -> np.ndarray:
    """Indices where a new level begins in an ascending array."""
    if sorted_values.size == 0:
        return np.zeros(0, dtype=np.intp)
    scale = np.maximum(1.0, np.abs(sorted_values))
    gaps = np.diff(sorted_values) > LEVEL_RTOL * np.maximum(scale[1:], scale[:-1])
    return np.concatenate(([0], np.nonzero(gaps)[0] + 1))


@dataclass(frozen=True, eq=False)
class WidthFunction:
    """
    Nonincreasing step function w_P(h) = P[r >= h].

    ``levels`` holds the distinct positive ratio values h_1 < ... < h_k and
    ``values[j]`` is w_P on (h_{j-1}, h_j] with h_0 = 0. Beyond h_k the
    function is 0. ``target_values`` is the Q-width function on the same
    segments.
    """

    levels: np.ndarray
    values: np.ndarray
    target_values: np.ndarray = field(repr=False)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.concatenate(([0.0], self.levels))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __call__(self, h):
        h = np.asarray(h, dtype=np.float64)
        idx = np.searchsorted(self.levels, h, side='left')
        padded = np.concatenate((self.values, [0.0]))
        out = padded[idx]
        return np.where(h <= 0, 1.0, out)

    def integral(self) -> float:
        return math.fsum(self.values * self.widths)


@dataclass(frozen=True)
class DivergenceReport:
    """All divergence quantities of one (P, Q) pair, in bits."""

    d_cs: float
    d_kl_direct: float
    d_kl_integral: float
    gap: float
    log_width_entropy: float

    @property
    def identity_residual(self) -> float:
        """(D_CS - D_KL) - (h(ln H) - lb e); zero up to round-off."""
        return self.gap - (self.log_width_entropy - LOG2E)

    def to_dict(self) -> dict:
        return asdict(self)


# -- discrete pairs -----------------------------------------------------------


def _as_pmf(values, label: str) -> np.ndarray:
    pmf = np.asarray(values, dtype=np.float64)
    if pmf.ndim != 1 or pmf.size == 0:
        raise ValueError(f"{label} must be a non-empty 1-D pmf")
    if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
        raise ValueError(f"{label} entries must be finite and non-negative")
    total = math.fsum(pmf)
    if abs(total - 1.0) > NORMALIZE_TOL:
        raise ValueError(f"{label} sums to {total!r}, expected 1")
    return pmf / total


def _discrete_pair(prior, target) -> Tuple[np.ndarray, np.ndarray]:
    p = _as_pmf(prior, 'prior')
    q = _as_pmf(target, 'target')
    if p.shape != q.shape:
        raise ValueError("prior and target must share one alphabet")
    if np.any((q > 0) & (p == 0)):
        raise AbsoluteContinuityViolation("target has mass outside the prior support")
    return p, q


def _discrete_width(p: np.ndarray, q: np.ndarray) -> WidthFunction:
    on = (p > 0) & (q > 0)
    ratios = q[on] / p[on]
    order = np.argsort(ratios, kind='stable')
    ratios = ratios[order]
    p_mass = p[on][order]
    q_mass = q[on][order]

    starts = merge_starts(ratios)
    levels = ratios[starts]
    p_level = np.add.reduceat(p_mass, starts)
    q_level = np.add.reduceat(q_mass, starts)
    values = np.cumsum(p_level[::-1])[::-1]
    target_values = np.cumsum(q_level[::-1])[::-1]
    return WidthFunction(levels, values, target_values)


def _antiderivative(h: np.ndarray) -> np.ndarray:
    """(ln h - 1) h, with value 0 at h = 0."""
    return xlogy(h, h) - h


def _discrete_report(p: np.ndarray, q: np.ndarray) -> DivergenceReport:
    width = _discrete_width(p, q)
    w = width.values
    dh = width.widths
    bounds = _antiderivative(width.breakpoints)
    dg = np.diff(bounds)

    d_cs = math.fsum(dh * phi(w))
    on = q > 0
    d_kl_direct = math.fsum(q[on] * np.log(q[on] / p[on])) * LOG2E
    d_kl_integral = LOG2E + math.fsum(w * dg) * LOG2E
    log_width_entropy = -math.fsum(w * (np.log2(w) * dh + LOG2E * dg))
    return DivergenceReport(
        d_cs=d_cs,
        d_kl_direct=d_kl_direct,
        d_kl_integral=d_kl_integral,
        gap=d_cs - d_kl_direct,
        log_width_entropy=log_width_entropy,
    )


# -- normal pairs -------------------------------------------------------------


class _QuadraticRatio:
    """
    ln r(x) = A - B (x - x0)^2 for Q = N(mu_q, s_q^2), P = N(mu_p, s_p^2).

    Requires s_q < s_p so that the ratio is bounded above by e^A.
    """

    def __init__(self, prior: Normal, target: Normal):
        sp, sq = prior.std, target.std
        if not sq < sp:
            raise ValueError("normal target must be narrower than the prior")
        self.prior = prior
        self.b = 0.5 / sq ** 2 - 0.5 / sp ** 2
        linear = target.mean / sq ** 2 - prior.mean / sp ** 2
        const = (
            math.log(sp / sq)
            - target.mean ** 2 / (2 * sq ** 2)
            + prior.mean ** 2 / (2 * sp ** 2)
        )
        self.x0 = linear / (2 * self.b)
        self.a = const + self.b * self.x0 ** 2

    def log_level(self, u):
        return self.a - self.b * u ** 2

    def width(self, u):
        """P[|X - x0| <= u] and its complement, both accurate near 0 and 1."""
        lo = (self.x0 - u - self.prior.mean) / self.prior.std
        hi = (self.x0 + u - self.prior.mean) / self.prior.std
        outside = ndtr(lo) + ndtr(-hi)
        return 1.0 - outside, outside

    def jacobian(self, u):
        """|dh/du| for h = exp(A - B u^2)."""
        return 2.0 * self.b * u * np.exp(self.log_level(u))

    def radius_limit(self) -> float:
        if self.a <= TRUNCATION_LOG_LEVEL:
            return 0.0
        return math.sqrt((self.a - TRUNCATION_LOG_LEVEL) / self.b)

    def width_function(self) -> Callable:
        def evaluate(h):
            h = np.asarray(h, dtype=np.float64)
            with np.errstate(divide='ignore'):
                t = np.log(np.maximum(h, 0.0))
            inside = np.clip((self.a - t) / self.b, 0.0, None)
            w, _ = self.width(np.sqrt(inside))
            return np.where(h <= 0, 1.0, np.where(t >= self.a, 0.0, w))

        return evaluate


def simpson(f: Callable, a: float, b: float, tol: float = QUADRATURE_TOL) -> float:
    """Composite Simpson rule, halving panels until two passes agree to tol."""
    if b <= a:
        return 0.0

    def rule(panels: int) -> float:
        x = np.linspace(a, b, panels + 1)
        weights = np.ones(panels + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        return float(np.dot(weights, f(x)) * (b - a) / (3 * panels))

    panels = 64
    previous = rule(panels)
    while panels < MAX_PANELS:
        panels *= 2
        current = rule(panels)
        if abs(current - previous) < tol:
            logger.debug("simpson converged with %d panels", panels)
            return current
        previous = current
    logger.warning("simpson stopped at %d panels without reaching tol=%g", panels, tol)
    return previous


def _normal_report(prior: Normal, target: Normal) -> DivergenceReport:
    if prior == target:
        return DivergenceReport(0.0, 0.0, 0.0, 0.0, LOG2E)
    ratio = _QuadraticRatio(prior, target)
    limit = ratio.radius_limit()

    def csd_integrand(u):
        w, _ = ratio.width(u)
        return ratio.jacobian(u) * phi(w)

    def kl_integrand(u):
        w, _ = ratio.width(u)
        return ratio.jacobian(u) * w * ratio.log_level(u)

    d_cs = simpson(csd_integrand, 0.0, limit)
    d_kl_integral = LOG2E + simpson(kl_integrand, 0.0, limit) * LOG2E

    def entropy_integrand(u):
        w, _ = ratio.width(u)
        return ratio.jacobian(u) * (phi(w) - w * ratio.log_level(u) * LOG2E)

    log_width_entropy = simpson(entropy_integrand, 0.0, limit)

    var_ratio = target.var / prior.var
    d_kl_direct = 0.5 * LOG2E * (
        -math.log(var_ratio) + var_ratio + (target.mean - prior.mean) ** 2 / prior.var - 1.0
    )
    return DivergenceReport(
        d_cs=d_cs,
        d_kl_direct=d_kl_direct,
        d_kl_integral=d_kl_integral,
        gap=d_cs - d_kl_direct,
        log_width_entropy=log_width_entropy,
    )


# -- public operations ----------------------------------------------------------


def _is_normal_pair(prior, target) -> bool:
    normals = isinstance(prior, Normal), isinstance(target, Normal)
    if any(normals) and not all(normals):
        raise TypeError("cannot mix a Normal with a discrete pmf")
    return all(normals)


def width_function(prior: Distribution, target: Distribution):
    """
    Build the P-width function of a pair.

    Returns:
        A WidthFunction for discrete pmfs, or a vectorized callable
        h -> w_P(h) for a Normal pair

    Raises:
        AbsoluteContinuityViolation: If Q puts mass where P has none
    """
    if _is_normal_pair(prior, target):
        if prior == target:
            return WidthFunction(np.array([1.0]), np.array([1.0]), np.array([1.0]))
        return _QuadraticRatio(prior, target).width_function()
    return _discrete_width(*_discrete_pair(prior, target))


def channel_simulation_divergence(prior: Distribution, target: Distribution) -> float:
    """D_CS(Q || P) in bits."""
    return divergence_gap(prior, target).d_cs


def kl_divergence(prior: Distribution, target: Distribution, method: str = 'direct') -> float:
    """
    D_KL(Q || P) in bits.

    Args:
        method: 'direct' sums q lb(q/p); 'integral' uses
            lb e + integral of w_P(h) lb h dh
    """
    if method not in ('direct', 'integral'):
        raise ValueError(f"unknown method: {method}")
    report = divergence_gap(prior, target)
    return report.d_kl_direct if method == 'direct' else report.d_kl_integral


def divergence_gap(prior: Distribution, target: Distribution) -> DivergenceReport:
    """Compute D_CS, both KL forms and h(ln H) for one pair."""
    if _is_normal_pair(prior, target):
        return _normal_report(prior, target)
    return _discrete_report(*_discrete_pair(prior, target))


def slice_report(channel: Channel, y) -> DivergenceReport:
    """DivergenceReport of the posterior given y against the prior."""
    if isinstance(channel, GaussianChannel):
        return divergence_gap(channel.prior, channel.posterior(float(y)))
    channel._check_y(y)
    return divergence_gap(channel.marginal_x, channel.posterior[:, int(y)])


def expected_channel_csd(channel: Channel, nodes: int = 40) -> float:
    """
    E_Y[D_CS(P_{X|Y} || P_X)] in bits.

    Exact for discrete channels; Gauss-Hermite over Y for the Gaussian
    channel, using ``nodes`` points.
    """
    if isinstance(channel, DiscreteJointChannel):
        return math.fsum(
            channel.marginal_y[y] * slice_report(channel, y).d_cs for y in range(channel.n_y)
        )
    points, weights = hermegauss(nodes)
    weights = weights / weights.sum()
    values = [slice_report(channel, channel.sigma_y * z).d_cs for z in points]
    return math.fsum(w * v for w, v in zip(weights, values))


def monte_carlo_csd(
    prior: Normal, target: Normal, samples: int, seed: int, batches: int = 50
) -> Tuple[float, float]:
    """
    Monte-Carlo D_CS oracle from prior samples.

    The empirical width function of the sampled log-ratios is integrated
    exactly. The standard error comes from ``batches`` independent batch
    estimates.

    Returns:
        (estimate in bits, standard error in bits)
    """
    if samples < batches or batches < 2:
        raise ValueError("need at least two batches and one sample per batch")
    ratio = _QuadraticRatio(prior, target)
    rng = np.random.default_rng(seed)
    x = rng.normal(prior.mean, prior.std, size=samples)
    log_r = ratio.log_level(x - ratio.x0)

    def estimate(values: np.ndarray) -> float:
        values = np.sort(values)
        count = values.size
        h = np.exp(values)
        dh = np.diff(np.concatenate(([0.0], h)))
        w = (count - np.arange(count)) / count
        return math.fsum(dh * phi(w))

    batch_values = [estimate(chunk) for chunk in np.array_split(log_r, batches)]
    stderr = float(np.std(batch_values, ddof=1) / math.sqrt(batches))
    return estimate(log_r), stderr
