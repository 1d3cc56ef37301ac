"""Divergence command - per-slice D_CS, D_KL and the gap identity."""

import click

from csdlab.cli.options import execute, experiment_options, parse_list
from csdlab.cli.output import bits


def summarize(record):
    outputs = record.outputs
    lines = [
        f"{outputs['channel']}: I(X;Y) = {bits(outputs['mutual_information_bits'])}, "
        f"E_Y[D_CS] = {bits(outputs['expected_csd_bits'])}"
    ]
    for row in record.rows:
        lines.append(
            f"y={row['y']}: D_CS {bits(row['d_cs_bits'])}, D_KL {bits(row['d_kl_bits'])}, "
            f"identity residual {row['identity_residual_bits']:.2e}"
        )
    return lines


@click.command('divergence')
@experiment_options
@click.option('--y-values', help='Comma-separated y values for a Gaussian channel')
def divergence_cmd(config_path, channel_path, seed, output_path, output_format, y_values):
    """
    Compute D_CS(P_{X|Y=y} || P_X) and D_KL for every slice of a channel.

    Each slice also reports the width-function KL representation and the
    residual of D_CS - D_KL = h(ln H) - lb e.

    Examples:
        csdlab divergence --channel bsc_011
        csdlab divergence --channel gaussian --y-values -1,0,2.5
        csdlab divergence --config exp.json --out divergence.json
    """
    overrides = {
        'channel_path': channel_path,
        'seed': seed,
        'output_path': output_path,
        'output_format': output_format,
        'y_values': parse_list(y_values, float),
    }
    execute('divergence', config_path, overrides, summarize)
