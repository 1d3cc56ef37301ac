"""Options shared by every experiment command and the common run path."""

from typing import Any, Callable, Dict, List, Optional

import click

from csdlab.cli.output import error, info, success, warning
from csdlab.core.config import OUTPUT_FORMATS, get_config
from csdlab.core.errors import BoundViolation, CsdlabError
from csdlab.core.records import ExperimentRecord, render, write_records
from csdlab.operations.runner import run

Summarizer = Callable[[ExperimentRecord], List[str]]


def experiment_options(fn: Callable) -> Callable:
    """Attach --config, --channel, --seed, --out and --format."""
    options = [
        click.option('--config', 'config_path', type=click.Path(dir_okay=False),
                     help='JSON experiment config'),
        click.option('--channel', 'channel_path',
                     help='Channel spec file or bundled name (e.g. bsc_011)'),
        click.option('--seed', type=int, help='Master seed (64-bit)'),
        click.option('--out', 'output_path', type=click.Path(dir_okay=False),
                     help='Write records here instead of stdout'),
        click.option('--format', 'output_format', type=click.Choice(OUTPUT_FORMATS),
                     help='Record format'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def parse_list(value: Optional[str], kind: type) -> Optional[list]:
    """Split a comma-separated option value."""
    if value is None:
        return None
    try:
        return [kind(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated {kind.__name__} values: {value}")


def execute(
    experiment: str,
    config_path: Optional[str],
    overrides: Dict[str, Any],
    summarize: Summarizer,
) -> None:
    """
    Load the config, run the experiment and emit its records.

    Records go to ``--out`` (atomically) or stdout; status lines go to
    stderr. Library errors exit with their documented code, and failed
    bound checks with the bound-violation code.
    """
    ctx = click.get_current_context()
    try:
        config = get_config(config_path, dict(overrides, experiment=experiment))
        records = run(config)
    except CsdlabError as exc:
        click.echo(error(str(exc)), err=True)
        ctx.exit(exc.exit_code)

    if config.output_path:
        path = write_records(records, config.output_path, config.output_format,
                             config.include_timing)
        click.echo(success(f"Wrote {len(records)} record(s) to {path}"), err=True)
    else:
        click.echo(render(records, config.output_format, config.include_timing), nl=False)

    for record in records:
        for line in summarize(record):
            click.echo(info(line), err=True)

    failed = [r.experiment for r in records if not r.passed]
    if failed:
        click.echo(error(f"Bound or identity check failed: {', '.join(failed)}"), err=True)
        ctx.exit(BoundViolation.exit_code)
    if records and all(r.passed for r in records):
        click.echo(success("All checks passed"), err=True)
    else:
        click.echo(warning("No records produced"), err=True)
