"""Redundancy-sweep command - block D_CS against n I(X;Y)."""

import click

from csdlab.cli.options import execute, experiment_options, parse_list
from csdlab.cli.output import bits


def summarize(record):
    lines = [f"{record.outputs['channel']}: slope of gap vs lb n = {record.outputs['slope']}"]
    for row in record.rows:
        lines.append(f"n={row['n']}: gap {bits(row['gap_bits'])}, "
                     f"gap/lb n {row['gap_over_lbn']}")
    return lines


@click.command('redundancy-sweep')
@experiment_options
@click.option('--n-list', help='Comma-separated increasing blocklengths')
@click.option('--mode', type=click.Choice(['exact', 'monte_carlo']),
              help='Exact (symmetric channels) or Monte-Carlo over Y^n')
@click.option('--samples', type=int, help='Y^n draws per blocklength in Monte-Carlo mode')
@click.option('--level-cap', type=int, help='Largest number of block levels kept')
def sweep_cmd(config_path, channel_path, seed, output_path, output_format,
              n_list, mode, samples, level_cap):
    """
    Tabulate E[D_CS] - n I over blocklengths.

    For non-singular channels the gap grows like (1/2) lb n; for singular
    channels it stays at zero.

    Examples:
        csdlab redundancy-sweep --channel bsc_011 --format csv
        csdlab redundancy-sweep --channel identity --n-list 2,4,8
        csdlab redundancy-sweep --channel random_4x4 --mode monte_carlo --samples 200
    """
    overrides = {
        'channel_path': channel_path,
        'seed': seed,
        'output_path': output_path,
        'output_format': output_format,
        'n_list': parse_list(n_list, int),
        'mode': mode,
        'samples': samples,
        'level_cap': level_cap,
    }
    execute('redundancy-sweep', config_path, overrides, summarize)
