"""Verify-all command - run the acceptance suite."""

import click

from csdlab.cli.options import execute, experiment_options, parse_list


def summarize(record):
    return [
        f"{'pass' if row['passed'] else 'FAIL'} {row['criterion']}: {row['detail']}"
        for row in record.rows
    ]


@click.command('verify-all')
@experiment_options
@click.option('--channels', help='Comma-separated channel set (default: bundled fixtures)')
@click.option('--samples', type=int, help='Monte-Carlo sample count')
@click.option('--num-seeds', type=int, help='Seeds for the one-shot entropy estimate')
def verify_cmd(config_path, channel_path, seed, output_path, output_format,
               channels, samples, num_seeds):
    """
    Check every identity, bound and limit law on a channel set.

    Exits 0 only if every criterion passes.

    Examples:
        csdlab verify-all
        csdlab verify-all --channels bsc_011,identity --seed 3
    """
    overrides = {
        'channel_path': channel_path,
        'seed': seed,
        'output_path': output_path,
        'output_format': output_format,
        'channels': parse_list(channels, str),
        'samples': samples,
        'num_seeds': num_seeds,
    }
    execute('verify-all', config_path, overrides, summarize)
