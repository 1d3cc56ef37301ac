"""Tilt-lab commands - cumulants, dominance, typicality and information balls."""

import click

from csdlab.cli.options import execute, experiment_options, parse_list


def summarize(record):
    outputs = record.outputs
    constants = outputs['constants']
    lines = [
        f"operating interval [{constants['lambda_lo']:.3f}, {constants['lambda_hi']:.3f}], "
        f"m2 in [{constants['m2_lo']:.4g}, {constants['m2_hi']:.4g}], m3 <= {constants['m3_hi']:.4g}",
    ]
    if 'cumulant' in outputs:
        c = outputs['cumulant']
        lines.append(f"Lambda({c['lambda']:g}, y={c['y']}) = {c['value']:.6g}, "
                     f"finite-difference error {outputs['finite_difference_error']:.2e}")
    if 'dominance_margin' in outputs:
        lines.append(f"dominance margin {outputs['dominance_margin']:.2e}, "
                     f"moment bounds {'hold' if outputs['moment_bounds_hold'] else 'FAIL'}")
    for sweep in outputs.get('typicality', []):
        lines.append(f"n={sweep['n']}: atypical {sweep['frequency']:.4f} <= C/n {sweep['bound']:.4g}")
    for ball in outputs.get('ball', []):
        lines.append(f"n={ball['n']}: ball bound slack {ball['slack_bits']:.2f} bits")
    return lines


def _run(section, config_path, overrides):
    execute('tilt-lab', config_path, dict(overrides, tilt_section=section), summarize)


def _common(channel_path, seed, output_path, output_format, epsilon):
    return {
        'channel_path': channel_path,
        'seed': seed,
        'output_path': output_path,
        'output_format': output_format,
        'epsilon': epsilon,
    }


epsilon_option = click.option('--epsilon', type=float, help='Typicality tolerance')
n_list_option = click.option('--n-list', help='Comma-separated blocklengths')
y_option = click.option('--y', 'tilt_y', type=int, help='Conditioning symbol')


@click.group('tilt-lab')
def tilt_lab_cmd():
    """
    Exercise the exponential-tilting machinery on one channel.

    Every report carries the operating interval and the regularity
    constants of the channel.

    Examples:
        csdlab tilt-lab cumulant --lambda 0.7 --y 0
        csdlab tilt-lab typicality --channel bsc_011 --n-list 256,1024
        csdlab tilt-lab all --channel random_4x4 --epsilon 0.005
    """
    pass


@tilt_lab_cmd.command('cumulant')
@experiment_options
@epsilon_option
@click.option('--lambda', 'tilt_lambda', type=float, help='Tilt parameter')
@y_option
def cumulant_cmd(config_path, channel_path, seed, output_path, output_format,
                 epsilon, tilt_lambda, tilt_y):
    """Lambda(lambda, y) and its derivatives against finite differences and direct sums."""
    overrides = _common(channel_path, seed, output_path, output_format, epsilon)
    _run('cumulant', config_path, dict(overrides, tilt_lambda=tilt_lambda, tilt_y=tilt_y))


@tilt_lab_cmd.command('dominance')
@experiment_options
@epsilon_option
def dominance_cmd(config_path, channel_path, seed, output_path, output_format, epsilon):
    """Stochastic dominance and tilted moment bounds over the lambda grid."""
    _run('dominance', config_path, _common(channel_path, seed, output_path, output_format, epsilon))


@tilt_lab_cmd.command('typicality')
@experiment_options
@epsilon_option
@n_list_option
@click.option('--samples', type=int, help='Monte-Carlo y-blocks per blocklength')
def typicality_cmd(config_path, channel_path, seed, output_path, output_format,
                   epsilon, n_list, samples):
    """Atypical-block frequency times n against the Chebyshev constant."""
    overrides = _common(channel_path, seed, output_path, output_format, epsilon)
    _run('typicality', config_path,
         dict(overrides, n_list=parse_list(n_list, int), samples=samples))


@tilt_lab_cmd.command('ball')
@experiment_options
@epsilon_option
@n_list_option
@y_option
def ball_cmd(config_path, channel_path, seed, output_path, output_format,
             epsilon, n_list, tilt_y):
    """Exact ball probability on constant blocks against its bound."""
    overrides = _common(channel_path, seed, output_path, output_format, epsilon)
    _run('ball', config_path, dict(overrides, n_list=parse_list(n_list, int), tilt_y=tilt_y))


@tilt_lab_cmd.command('all')
@experiment_options
@epsilon_option
@n_list_option
@click.option('--samples', type=int, help='Monte-Carlo y-blocks per blocklength')
@click.option('--lambda', 'tilt_lambda', type=float, help='Tilt for the cumulant report')
@y_option
def all_cmd(config_path, channel_path, seed, output_path, output_format,
            epsilon, n_list, samples, tilt_lambda, tilt_y):
    """Run the cumulant, dominance, typicality and ball reports together."""
    overrides = _common(channel_path, seed, output_path, output_format, epsilon)
    _run('all', config_path, dict(
        overrides,
        n_list=parse_list(n_list, int),
        samples=samples,
        tilt_lambda=tilt_lambda,
        tilt_y=tilt_y,
    ))
