"""CLI commands for csdlab."""

from csdlab.cli.commands.divergence import divergence_cmd
from csdlab.cli.commands.simulate import simulate_cmd
from csdlab.cli.commands.sweep import sweep_cmd
from csdlab.cli.commands.tilt_lab import tilt_lab_cmd
from csdlab.cli.commands.verify import verify_cmd

__all__ = ['divergence_cmd', 'sweep_cmd', 'simulate_cmd', 'tilt_lab_cmd', 'verify_cmd']
