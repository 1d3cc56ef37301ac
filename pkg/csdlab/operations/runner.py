"""Experiment runner behind the command-line subcommands.

Each experiment turns an ExperimentConfig into ExperimentRecords. A record
is marked failed when one of the bounds or identities it asserts does not
hold; the CLI maps that to the bound-violation exit code.
"""

import logging
import math
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import comb, expit

from csdlab.core.channel import (
    Channel,
    DiscreteJointChannel,
    bundled_channel,
    bundled_channel_paths,
    is_nonsingular,
    llr_stats,
    load_channel,
    mutual_information,
)
from csdlab.core.config import ExperimentConfig
from csdlab.core.errors import ConfigError
from csdlab.core.records import ExperimentRecord
from csdlab.operations.blocks import (
    clt_check,
    redundancy_curve,
    redundancy_slope,
    verify_cdf_identity,
)
from csdlab.operations.divergence import (
    divergence_gap,
    expected_channel_csd,
    merge_starts,
    slice_report,
)
from csdlab.operations.sampler import conditional_index_entropy, exactness_test
from csdlab.operations.tilting import (
    MAX_ENUMERATION,
    BlockEnumeration,
    RegularityConstants,
    ball_probability_bound_check,
    ball_replacement_check,
    check_epsilon,
    cumulant,
    enumerate_blocks,
    gibbs_check,
    k_epsilon_grid,
    moment_bound_check,
    regularity_constants,
    stochastic_dominance_check,
    tilted_measure,
    typicality_sweep,
)

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9
GAUSSIAN_IDENTITY_TOL = 1e-6
GAP_ZERO_TOL = 1e-9
CDF_TOL = 1e-9
FD_STEP = 1e-4
FD_RTOL = 1e-5
FD_ATOL = 1e-7
DIRECT_TOL = 1e-10
TV_SCALE = 5.0
SLACK_BAND = 8.0
ENTROPY_CORRIDOR_BITS = 8.0
EXACTNESS_MIN_SAMPLES = 10_000
ORACLE_PAIRS = 200
TILT_TRIPLES = 100
GIBBS_TRIALS = 500
GIBBS_MAX_N = 12
GIBBS_MAX_SHARPNESS = 20.0
CLT_BLOCKS = (16, 4096)
BALL_BLOCKS = (64, 256, 1024)
TYPICALITY_BLOCKS = (256, 1024)


def resolve_channel(spec: str) -> Channel:
    """Load a channel from a file path or a bundled fixture stem."""
    path = Path(spec)
    if path.suffix == '.json' or path.exists():
        return load_channel(path)
    return bundled_channel(spec)


def _discrete(channel: Channel, experiment: str) -> DiscreteJointChannel:
    if not isinstance(channel, DiscreteJointChannel):
        raise ConfigError(f"{experiment} needs a discrete channel, got {channel.name}")
    return channel


def _inputs(config: ExperimentConfig, *keys: str) -> Dict[str, Any]:
    data = config.to_dict()
    echoed = {key: data[key] for key in ('experiment', 'channel_path', 'seed', *keys)}
    if config.tolerances:
        echoed['tolerances'] = dict(config.tolerances)
    return echoed


# -- divergence -----------------------------------------------------------------


def _slice_rows(channel: Channel, y_values: Sequence[float]) -> List[Dict[str, Any]]:
    ys = range(channel.n_y) if isinstance(channel, DiscreteJointChannel) else y_values
    rows = []
    for y in ys:
        report = slice_report(channel, y)
        rows.append({
            'y': y,
            'd_cs_bits': report.d_cs,
            'd_kl_bits': report.d_kl_direct,
            'd_kl_integral_bits': report.d_kl_integral,
            'gap_bits': report.gap,
            'log_width_entropy_bits': report.log_width_entropy,
            'identity_residual_bits': report.identity_residual,
        })
    return rows


def _rows_hold(rows: Sequence[Dict[str, Any]], tol: float) -> bool:
    return all(
        row['gap_bits'] >= -tol
        and abs(row['identity_residual_bits']) <= tol
        and abs(row['d_kl_bits'] - row['d_kl_integral_bits']) <= tol
        for row in rows
    )


def _identity_tol(config: ExperimentConfig, channel: Channel) -> float:
    default = IDENTITY_TOL if isinstance(channel, DiscreteJointChannel) else GAUSSIAN_IDENTITY_TOL
    return config.tolerance('identity', default)


def run_divergence(config: ExperimentConfig) -> List[ExperimentRecord]:
    """Per-slice D_CS, D_KL and the gap identity, plus E_Y[D_CS]."""
    channel = resolve_channel(config.channel_path)
    rows = _slice_rows(channel, config.y_values)
    stats = llr_stats(channel)
    outputs = {
        'channel': channel.name,
        'mutual_information_bits': mutual_information(channel),
        'expected_csd_bits': expected_channel_csd(channel),
        'llr_variance_nats2': stats.var,
        'expected_conditional_variance_nats2': stats.expected_conditional_variance,
    }
    keys = () if isinstance(channel, DiscreteJointChannel) else ('y_values',)
    passed = _rows_hold(rows, _identity_tol(config, channel))
    return [ExperimentRecord('divergence', _inputs(config, *keys), outputs, passed, rows=rows)]


# -- redundancy sweep -------------------------------------------------------------


def run_redundancy_sweep(config: ExperimentConfig) -> List[ExperimentRecord]:
    """E[D_CS(P_{X^n|Y^n} || P_X^n)] - nI over the configured blocklengths."""
    channel = _discrete(resolve_channel(config.channel_path), 'redundancy-sweep')
    points = redundancy_curve(
        channel, config.n_list, config.mode, config.samples, config.seed, config.level_cap
    )
    rows = [{
        'n': p.n,
        'expected_dcs_bits': p.expected_dcs,
        'block_mi_bits': p.block_mi,
        'gap_bits': p.gap,
        'gap_over_lbn': p.gap_over_lbn,
        'stderr_bits': p.stderr,
        'mode': p.mode,
        'seed': p.seed,
    } for p in points]

    singular = not is_nonsingular(channel)[0]
    tol = config.tolerance('gap_zero', GAP_ZERO_TOL)
    if config.mode == 'exact':
        passed = all(p.gap >= -tol for p in points)
        if singular:
            passed = passed and all(abs(p.gap) <= tol for p in points)
    else:
        passed = all(p.gap >= -3 * p.stderr - tol for p in points)
    outputs = {
        'channel': channel.name,
        'mutual_information_bits': mutual_information(channel),
        'singular': singular,
        'slope': redundancy_slope(points) if len(points) >= 2 else None,
    }
    inputs = _inputs(config, 'n_list', 'mode', 'samples', 'level_cap')
    return [ExperimentRecord('redundancy-sweep', inputs, outputs, passed, rows=rows)]


# -- simulate ------------------------------------------------------------------------


def entropy_corridor(expected_csd: float) -> float:
    """Upper end of the one-shot corridor, E_Y[D_CS] + lb(E_Y[D_CS] + 1) + 8."""
    return expected_csd + math.log2(expected_csd + 1.0) + ENTROPY_CORRIDOR_BITS


def run_simulate(config: ExperimentConfig) -> List[ExperimentRecord]:
    """H(N* | Z) against E_Y[D_CS], and the sampler's TV distance."""
    channel = _discrete(resolve_channel(config.channel_path), 'simulate')
    estimate = conditional_index_entropy(
        channel, config.num_seeds, config.seed, config.max_proposals
    )
    lower = expected_channel_csd(channel)
    upper = entropy_corridor(lower)
    passed = lower - 3 * estimate.stderr - IDENTITY_TOL <= estimate.value <= upper

    outputs: Dict[str, Any] = {
        'channel': channel.name,
        'entropy_bits': estimate.value,
        'entropy_stderr_bits': estimate.stderr,
        'expected_csd_bits': lower,
        'mutual_information_bits': mutual_information(channel),
        'corridor_upper_bits': upper,
        'tv_distance': None,
        'tv_threshold': None,
    }
    if config.samples >= EXACTNESS_MIN_SAMPLES:
        tv = exactness_test(channel, config.samples, config.seed, config.max_proposals)
        threshold = config.tolerance('tv_scale', TV_SCALE) / math.sqrt(config.samples)
        outputs.update(tv_distance=tv, tv_threshold=threshold)
        passed = passed and tv < threshold
    else:
        logger.warning("samples=%d below %d; exactness test skipped",
                       config.samples, EXACTNESS_MIN_SAMPLES)
    inputs = _inputs(config, 'num_seeds', 'samples', 'max_proposals')
    return [ExperimentRecord('simulate', inputs, outputs, bool(passed))]


# -- tilt lab ----------------------------------------------------------------------------


def cumulant_errors(channel: DiscreteJointChannel, lam: float, y: int) -> Tuple[bool, float, float]:
    """
    Compare Lambda', Lambda'', Lambda''' with central differences of the
    next-lower derivative and with the mean, variance and third central
    moment of the tilted pmf.

    Returns:
        (all agree, worst finite-difference error, worst direct error)
    """
    c = cumulant(channel, lam, y)
    plus = cumulant(channel, lam + FD_STEP, y)
    minus = cumulant(channel, lam - FD_STEP, y)
    pairs = [
        ((plus.value - minus.value) / (2 * FD_STEP), c.d1),
        ((plus.d1 - minus.d1) / (2 * FD_STEP), c.d2),
        ((plus.d2 - minus.d2) / (2 * FD_STEP), c.d3),
    ]
    fd_ok = all(math.isclose(fd, exact, rel_tol=FD_RTOL, abs_tol=FD_ATOL) for fd, exact in pairs)
    fd_error = max(abs(fd - exact) / max(abs(exact), FD_ATOL / FD_RTOL) for fd, exact in pairs)

    q = tilted_measure(channel, lam, y)
    support = q.support
    levels = channel.log_ratio[support, y]
    mean = math.fsum(q.pmf[support] * levels)
    var = math.fsum(q.pmf[support] * (levels - mean) ** 2)
    third = math.fsum(q.pmf[support] * (levels - mean) ** 3)
    direct_error = max(abs(mean - c.d1), abs(var - c.d2), abs(third - c.d3))
    return fd_ok and direct_error <= DIRECT_TOL, fd_error, direct_error


def _dominance_margin(channel: DiscreteJointChannel, grid: np.ndarray) -> float:
    worst = math.inf
    for y in range(channel.n_y):
        for l1, l2 in zip(grid[:-1], grid[1:]):
            worst = min(worst, stochastic_dominance_check(channel, y, l1, l2)[1])
    return worst


def _moment_bounds_hold(channel: DiscreteJointChannel, grid: np.ndarray) -> bool:
    return all(
        moment_bound_check(channel, y, k, grid)
        for y in range(channel.n_y)
        for k in range(1, 7)
    )


def _level_count(channel: DiscreteJointChannel, y: int, n: int) -> int:
    levels = np.sort(channel.log_ratio[channel.support(y), y])
    distinct = len(merge_starts(levels))
    return int(comb(n + distinct - 1, distinct - 1, exact=True))


def ball_sweep(
    channel: DiscreteJointChannel,
    constants: RegularityConstants,
    n_list: Sequence[int],
    y: int,
    radius_offset: float,
    cap: int,
) -> List[Dict[str, Any]]:
    """
    Ball probability bound on constant blocks y^n for each feasible n.

    The radius sits ``radius_offset`` nats above Lambda'(1, y), capped at
    the midpoint towards Lambda'(lambda_hi, y).
    """
    centre = cumulant(channel, 1.0, y).d1
    ceiling = cumulant(channel, constants.lambda_hi, y).d1
    radius = min(centre + radius_offset, 0.5 * (centre + ceiling))
    rows = []
    for n in n_list:
        if _level_count(channel, y, n) > cap:
            logger.info("ball check at n=%d skipped: level count above cap", n)
            continue
        report = ball_probability_bound_check(channel, [y] * n, constants, radius)
        rows.append(dict(report.to_dict(), n=n))
    return rows


def _slack_ok(rows: Sequence[Dict[str, Any]], band: float) -> bool:
    slacks = [row['slack_bits'] for row in rows]
    return all(s > 0 for s in slacks) and (max(slacks) - min(slacks) <= band if slacks else True)


def _tilt_cumulant(
    channel: DiscreteJointChannel,
    constants: RegularityConstants,
    grid: np.ndarray,
    config: ExperimentConfig,
) -> Tuple[Dict[str, Any], bool]:
    c = cumulant(channel, config.tilt_lambda, config.tilt_y)
    ok, fd_error, direct_error = cumulant_errors(channel, config.tilt_lambda, config.tilt_y)
    outputs = {
        'cumulant': {'lambda': c.lam, 'y': c.y, 'value': c.value,
                     'd1': c.d1, 'd2': c.d2, 'd3': c.d3},
        'finite_difference_error': fd_error,
        'direct_sum_error': direct_error,
    }
    return outputs, ok


def _tilt_dominance(
    channel: DiscreteJointChannel,
    constants: RegularityConstants,
    grid: np.ndarray,
    config: ExperimentConfig,
) -> Tuple[Dict[str, Any], bool]:
    margin = _dominance_margin(channel, grid)
    moments_ok = _moment_bounds_hold(channel, grid)
    outputs = {'dominance_margin': margin, 'moment_bounds_hold': moments_ok}
    return outputs, margin >= -1e-12 and moments_ok


def _tilt_typicality(
    channel: DiscreteJointChannel,
    constants: RegularityConstants,
    grid: np.ndarray,
    config: ExperimentConfig,
) -> Tuple[Dict[str, Any], bool]:
    sweeps = [
        typicality_sweep(channel, n, config.epsilon, grid, config.samples, config.seed).to_dict()
        for n in config.n_list
    ]
    return {'typicality': sweeps}, all(s['holds'] for s in sweeps)


def _tilt_ball(
    channel: DiscreteJointChannel,
    constants: RegularityConstants,
    grid: np.ndarray,
    config: ExperimentConfig,
) -> Tuple[Dict[str, Any], bool]:
    rows = ball_sweep(
        channel, constants, config.n_list, config.tilt_y, config.radius_offset, config.level_cap
    )
    return {'ball': rows}, _slack_ok(rows, config.tolerance('slack_band', SLACK_BAND))


_TILT_SECTIONS = {
    'cumulant': _tilt_cumulant,
    'dominance': _tilt_dominance,
    'typicality': _tilt_typicality,
    'ball': _tilt_ball,
}

_TILT_INPUTS = {
    'cumulant': ('tilt_lambda', 'tilt_y'),
    'dominance': (),
    'typicality': ('n_list', 'samples'),
    'ball': ('n_list', 'tilt_y', 'radius_offset', 'level_cap'),
}


def run_tilt_lab(config: ExperimentConfig) -> List[ExperimentRecord]:
    """
    Tilt-lab reports for one channel.

    ``config.tilt_section`` selects the cumulant, dominance, typicality or
    ball report, or all four. The regularity constants are always part of
    the record.
    """
    channel = _discrete(resolve_channel(config.channel_path), 'tilt-lab')
    constants = regularity_constants(channel, config.epsilon, config.lambda_grid_resolution)
    check_epsilon(channel, constants)
    grid = k_epsilon_grid(constants.lambda_lo, constants.lambda_hi, config.epsilon)

    names = list(_TILT_SECTIONS) if config.tilt_section == 'all' else [config.tilt_section]
    outputs: Dict[str, Any] = {
        'channel': channel.name,
        'section': config.tilt_section,
        'constants': constants.to_dict(),
    }
    passed = True
    keys = ['tilt_section', 'epsilon', 'lambda_grid_resolution']
    for name in names:
        section, ok = _TILT_SECTIONS[name](channel, constants, grid, config)
        logger.info("tilt-lab %s: %s", name, 'pass' if ok else 'FAIL')
        outputs.update(section)
        passed = passed and ok
        keys.extend(key for key in _TILT_INPUTS[name] if key not in keys)
    return [ExperimentRecord('tilt-lab', _inputs(config, *keys), outputs, bool(passed))]


# -- verify-all --------------------------------------------------------------------------


def _channel_set(config: ExperimentConfig) -> List[Tuple[str, Channel]]:
    names = config.channels or [p.stem for p in bundled_channel_paths()]
    return [(name, resolve_channel(name)) for name in names]


def _criterion(name: str, passed: bool, detail: str) -> Dict[str, Any]:
    logger.info("%s: %s (%s)", name, 'pass' if passed else 'FAIL', detail)
    return {'criterion': name, 'passed': bool(passed), 'detail': detail}


def _skipped(name: str, reason: str) -> Dict[str, Any]:
    return _criterion(name, True, f"skipped: {reason}")


def _random_pair(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    size = int(rng.integers(1, 17))
    p = rng.dirichlet(np.ones(size))
    q = rng.dirichlet(np.ones(size))
    q[rng.random(size) < 0.2] = 0.0
    if q.sum() == 0:
        q[int(rng.integers(size))] = 1.0
    return p, q / q.sum()


def _check_oracle(config: ExperimentConfig, rng: np.random.Generator) -> Dict[str, Any]:
    tol = config.tolerance('identity', IDENTITY_TOL)
    kl_error = residual = 0.0
    slack = math.inf
    for _ in range(ORACLE_PAIRS):
        report = divergence_gap(*_random_pair(rng))
        kl_error = max(kl_error, abs(report.d_kl_direct - report.d_kl_integral))
        residual = max(residual, abs(report.identity_residual))
        slack = min(slack, report.gap)
    passed = kl_error <= tol and residual <= tol and slack >= -tol
    return _criterion(
        'divergence-oracle', passed,
        f"{ORACLE_PAIRS} pairs: kl error {kl_error:.2e}, identity residual {residual:.2e}",
    )


def _check_ordering(config: ExperimentConfig, channels) -> Dict[str, Any]:
    worst = math.inf
    passed = True
    for _, channel in channels:
        rows = _slice_rows(channel, config.y_values)
        passed = passed and _rows_hold(rows, _identity_tol(config, channel))
        worst = min([worst] + [row['gap_bits'] for row in rows])
    return _criterion('ordering', passed, f"smallest D_CS - D_KL {worst:.3e} bits")


def _check_redundancy(config: ExperimentConfig, channel) -> Dict[str, Any]:
    points = redundancy_curve(channel, config.n_list, 'exact', cap=config.level_cap)
    if len(points) < 2:
        return _skipped('redundancy-law', "n_list needs two blocklengths")
    slope = redundancy_slope(points)
    distances = [abs(p.gap_over_lbn - 0.5) for p in points if p.gap_over_lbn is not None]
    passed = 0.4 <= slope <= 0.6 and distances[-1] < distances[0]
    return _criterion(
        'redundancy-law', passed,
        f"{channel.name}: slope {slope:.4f}, |gap/lb n - 1/2| {distances[0]:.4f} -> {distances[-1]:.4f}",
    )


def _check_singular(config: ExperimentConfig, channels) -> Dict[str, Any]:
    tol = config.tolerance('gap_zero', GAP_ZERO_TOL)
    worst = 0.0
    for channel in channels:
        points = redundancy_curve(channel, config.n_list, 'exact', cap=config.level_cap)
        worst = max([worst] + [abs(p.gap) for p in points])
    names = ', '.join(c.name for c in channels)
    return _criterion('singular-contrast', worst <= tol, f"{names}: largest |gap| {worst:.2e} bits")


def _check_one_shot(config: ExperimentConfig, channels) -> Dict[str, Any]:
    details = []
    passed = True
    for channel in channels:
        estimate = conditional_index_entropy(
            channel, config.num_seeds, config.seed, config.max_proposals
        )
        lower = expected_channel_csd(channel)
        ok = lower - 3 * estimate.stderr - IDENTITY_TOL <= estimate.value <= entropy_corridor(lower)
        passed = passed and ok
        details.append(f"{channel.name} H={estimate.value:.3f} E[D_CS]={lower:.3f}")
    return _criterion('one-shot-bound', passed, '; '.join(details))


def _check_exactness(config: ExperimentConfig, channel) -> Dict[str, Any]:
    samples = config.exactness_samples
    tv = exactness_test(channel, samples, config.seed, config.max_proposals)
    threshold = config.tolerance('tv_scale', TV_SCALE) / math.sqrt(samples)
    return _criterion('sampler-exactness', tv < threshold,
                      f"{channel.name}: TV {tv:.5f} < {threshold:.5f} at {samples} samples")


def _check_cdf(config: ExperimentConfig, channel, rng: np.random.Generator) -> Dict[str, Any]:
    tol = config.tolerance('cdf', CDF_TOL)
    worst = 0.0
    for n in range(1, 11):
        for block in ([0] * n, [int(v) for v in rng.choice(channel.n_y, size=n, p=channel.marginal_y)]):
            worst = max(worst, verify_cdf_identity(channel, block))
    return _criterion('cdf-identity', worst < tol, f"{channel.name}: sup discrepancy {worst:.2e}")


def _check_clt(config: ExperimentConfig, channel) -> Dict[str, Any]:
    results = clt_check(channel, CLT_BLOCKS, config.clt_samples, config.seed)
    (n_small, ks_small), (n_large, ks_large) = results
    return _criterion(
        'clt', ks_large < ks_small,
        f"{channel.name}: KS {ks_small:.4f} at n={n_small}, {ks_large:.4f} at n={n_large}, "
        f"{config.clt_samples} samples",
    )


def _check_tilting(config: ExperimentConfig, channels, rng: np.random.Generator) -> Dict[str, Any]:
    passed = True
    fd_worst = direct_worst = 0.0
    for _ in range(TILT_TRIPLES):
        channel = channels[int(rng.integers(len(channels)))]
        lam = float(rng.uniform(0.2, 1.8))
        y = int(rng.integers(channel.n_y))
        ok, fd_error, direct_error = cumulant_errors(channel, lam, y)
        grid = np.sort(rng.uniform(0.2, 1.8, size=8))
        ok = ok and stochastic_dominance_check(channel, y, grid[0], grid[-1])[0]
        ok = ok and all(moment_bound_check(channel, y, k, grid) for k in range(1, 7))
        passed = passed and ok
        fd_worst = max(fd_worst, fd_error)
        direct_worst = max(direct_worst, direct_error)
    return _criterion(
        'tilting', passed,
        f"{TILT_TRIPLES} triples: finite-difference error {fd_worst:.2e}, direct error {direct_worst:.2e}",
    )


def decoder_like_subset(enum: BlockEnumeration, rng: np.random.Generator) -> np.ndarray:
    """
    Random set that keeps each block with a probability rising in its
    per-letter log-ratio, at a random centre and sharpness.

    Sharpness zero gives a uniform random set; large sharpness gives a
    near-threshold set like a decoder's preimage.
    """
    averages = enum.sums / enum.n
    finite = averages[np.isfinite(averages)]
    centre = rng.uniform(finite.min(), finite.max())
    sharpness = rng.uniform(0.0, GIBBS_MAX_SHARPNESS)
    mask = rng.random(averages.size) < expit(sharpness * (averages - centre))
    if not mask.any():
        mask[int(rng.integers(averages.size))] = True
    return mask


def _check_balls(config: ExperimentConfig, channel, rng: np.random.Generator) -> Dict[str, Any]:
    constants = regularity_constants(channel, config.epsilon, config.lambda_grid_resolution)
    max_n = min(GIBBS_MAX_N, int(math.log(MAX_ENUMERATION) / math.log(channel.n_x)))
    replaced = informative = finite = in_regime = gibbs_failures = 0
    for _ in range(GIBBS_TRIALS):
        n = int(rng.integers(1, max_n + 1))
        y_block = [int(v) for v in rng.choice(channel.n_y, size=n, p=channel.marginal_y)]
        enum = enumerate_blocks(channel, y_block)
        mask = decoder_like_subset(enum, rng)

        derived = gibbs_check(channel, y_block, mask, constants)
        if math.isfinite(derived.radius):
            finite += 1
            if n >= constants.n0:
                in_regime += 1
                gibbs_failures += not derived.holds

        # any radius at or below iota(A) keeps B non-empty
        lowest = float(enum.sums[np.isfinite(enum.sums)].min()) / n
        radius = float(rng.uniform(lowest, max(lowest, derived.iota_a)))
        report = ball_replacement_check(channel, y_block, mask, radius)
        replaced += report.replaces
        informative += report.iota_b <= report.iota_a and not report.whole_space
    gibbs_ok = replaced == GIBBS_TRIALS and gibbs_failures == 0

    rows = ball_sweep(channel, constants, BALL_BLOCKS, 0, config.radius_offset, config.level_cap)
    slack_ok = _slack_ok(rows, config.tolerance('slack_band', SLACK_BAND))
    slacks = ', '.join(f"n={row['n']}: {row['slack_bits']:.2f}" for row in rows)
    detail = (
        f"{channel.name}: {GIBBS_TRIALS} random sets at n <= {max_n}; "
        f"replacement held on {replaced} "
        f"({informative} with iota(B) <= iota(A) and B short of the whole space); "
        f"derived radius finite on {finite}, n >= n0={constants.n0} on {in_regime}; "
        f"slack bits {slacks}"
    )
    return _criterion('ball-machinery', gibbs_ok and slack_ok, detail)


def _check_typicality(config: ExperimentConfig, channel) -> Dict[str, Any]:
    constants = regularity_constants(channel, config.epsilon, config.lambda_grid_resolution)
    grid = k_epsilon_grid(constants.lambda_lo, constants.lambda_hi, config.epsilon)
    sweeps = [
        typicality_sweep(channel, n, config.epsilon, grid, config.samples, config.seed)
        for n in TYPICALITY_BLOCKS
    ]
    detail = ', '.join(f"n={s.n}: {s.frequency:.4f} <= {s.bound:.3g}" for s in sweeps)
    return _criterion('typicality', all(s.holds for s in sweeps), f"{channel.name}: {detail}")


def verify_all(config: ExperimentConfig) -> List[ExperimentRecord]:
    """
    Run the acceptance suite on the configured channel set.

    The block-law, CDF, CLT, exactness, ball and typicality criteria use
    the first symmetric non-singular discrete channel of the set.
    """
    channels = _channel_set(config)
    discrete = [c for _, c in channels if isinstance(c, DiscreteJointChannel)]
    nonsingular = [c for c in discrete if is_nonsingular(c)[0]]
    symmetric = [c for c in nonsingular if c.symmetric]
    singular = [c for c in discrete if c.symmetric and c not in nonsingular]
    rng = np.random.default_rng(config.seed)

    criteria = [_check_oracle(config, rng), _check_ordering(config, channels)]
    reference = symmetric[0] if symmetric else None
    if reference is not None:
        criteria.append(_check_redundancy(config, reference))
    else:
        criteria.append(_skipped('redundancy-law', "no symmetric non-singular channel"))
    criteria.append(
        _check_singular(config, singular) if singular
        else _skipped('singular-contrast', "no symmetric singular channel")
    )
    criteria.append(
        _check_one_shot(config, discrete) if discrete
        else _skipped('one-shot-bound', "no discrete channel")
    )
    if reference is not None:
        criteria.extend([
            _check_exactness(config, reference),
            _check_cdf(config, reference, rng),
            _check_clt(config, reference),
        ])
    else:
        for name in ('sampler-exactness', 'cdf-identity', 'clt'):
            criteria.append(_skipped(name, "no symmetric non-singular channel"))
    criteria.append(
        _check_tilting(config, nonsingular, rng) if nonsingular
        else _skipped('tilting', "no non-singular discrete channel")
    )
    if reference is not None:
        criteria.extend([_check_balls(config, reference, rng), _check_typicality(config, reference)])
    else:
        for name in ('ball-machinery', 'typicality'):
            criteria.append(_skipped(name, "no symmetric non-singular channel"))

    failed = [c['criterion'] for c in criteria if not c['passed']]
    outputs = {
        'channels': [name for name, _ in channels],
        'criteria': len(criteria),
        'failed': failed,
    }
    inputs = _inputs(config, 'channels', 'n_list', 'samples', 'exactness_samples', 'clt_samples',
                     'num_seeds', 'epsilon', 'lambda_grid_resolution', 'radius_offset',
                     'max_proposals', 'level_cap')
    return [ExperimentRecord('verify-all', inputs, outputs, not failed, rows=criteria)]


_EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], List[ExperimentRecord]]] = {
    'divergence': run_divergence,
    'redundancy-sweep': run_redundancy_sweep,
    'simulate': run_simulate,
    'tilt-lab': run_tilt_lab,
    'verify-all': verify_all,
}


def run(config: ExperimentConfig) -> List[ExperimentRecord]:
    """Dispatch a validated config to its experiment."""
    config.validate()
    logger.info("running %s on %s (seed %d)", config.experiment, config.channel_path, config.seed)
    start = time.perf_counter()
    records = _EXPERIMENTS[config.experiment](config)
    elapsed = time.perf_counter() - start
    for record in records:
        record.wall_seconds = elapsed
    return records
