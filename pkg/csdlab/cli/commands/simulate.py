"""Simulate command - run the Poisson functional representation sampler."""

import click

from csdlab.cli.options import execute, experiment_options
from csdlab.cli.output import bits


def summarize(record):
    outputs = record.outputs
    lines = [
        f"H(N*|Z) = {bits(outputs['entropy_bits'])} "
        f"(stderr {outputs['entropy_stderr_bits']:.4f}), "
        f"E_Y[D_CS] = {bits(outputs['expected_csd_bits'])}, "
        f"corridor upper end {bits(outputs['corridor_upper_bits'])}"
    ]
    if outputs['tv_distance'] is not None:
        lines.append(f"TV distance {outputs['tv_distance']:.5f} "
                     f"(threshold {outputs['tv_threshold']:.5f})")
    return lines


@click.command('simulate')
@experiment_options
@click.option('--num-seeds', type=int, help='Common-randomness seeds for H(N*|Z)')
@click.option('--samples', type=int, help='Encodes for the exactness test')
@click.option('--max-proposals', type=int, help='Proposal budget per encode')
def simulate_cmd(config_path, channel_path, seed, output_path, output_format,
                 num_seeds, samples, max_proposals):
    """
    Estimate H(N* | Z) and check that the sampler reproduces the channel.

    Examples:
        csdlab simulate --channel bsc_011
        csdlab simulate --channel random_4x4 --num-seeds 1000 --seed 7
    """
    overrides = {
        'channel_path': channel_path,
        'seed': seed,
        'output_path': output_path,
        'output_format': output_format,
        'num_seeds': num_seeds,
        'samples': samples,
        'max_proposals': max_proposals,
    }
    execute('simulate', config_path, overrides, summarize)
