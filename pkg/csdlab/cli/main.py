"""Main CLI entry point for csdlab."""

import logging

import click
from colorama import init

from csdlab import __version__
from csdlab.cli.commands import (divergence_cmd, simulate_cmd, sweep_cmd, tilt_lab_cmd,
                                 verify_cmd)
from csdlab.cli.output import BANNER
from csdlab.core.errors import EXIT_CODES

# Initialize colorama for cross-platform colored output
init(autoreset=True)

EXIT_CODE_HELP = 'Exit codes: ' + ', '.join(f"{code} {meaning}" for code, meaning in EXIT_CODES.items())


class CsdlabGroup(click.Group):
    """Custom Group class to display banner before help."""

    def format_help(self, ctx, formatter):
        """Override to add banner before help text."""
        click.echo(BANNER)
        super().format_help(ctx, formatter)


@click.group(cls=CsdlabGroup, epilog=EXIT_CODE_HELP)
@click.version_option(version=__version__)
@click.option('-v', '--verbose', count=True, help='-v for progress, -vv for debug logging')
def cli(verbose):
    """Experiments on the channel simulation divergence."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    logging.getLogger('csdlab').setLevel(level)


cli.add_command(divergence_cmd)
cli.add_command(sweep_cmd)
cli.add_command(simulate_cmd)
cli.add_command(tilt_lab_cmd)
cli.add_command(verify_cmd)


def main():
    """Main entry point."""
    cli()


if __name__ == '__main__':
    main()
