"""Integration tests for the tilt-lab commands."""

import json

from click.testing import CliRunner

from csdlab.cli.main import cli


def read_record(path):
    return json.loads(path.read_text())['records'][0]


class TestTiltLabCommand:
    """Tests for csdlab tilt-lab."""

    def test_all_sections_on_bsc(self, temp_dir):
        """The BSC passes every tilting, typicality and ball check."""
        out = temp_dir / 'tilt.json'
        result = CliRunner().invoke(cli, [
            'tilt-lab', 'all', '--channel', 'bsc_011', '--n-list', '64,256', '--samples', '200',
            '--out', str(out),
        ])
        assert result.exit_code == 0
        record = read_record(out)
        outputs = record['outputs']
        assert record['passed'] is True
        assert outputs['section'] == 'all'
        assert outputs['constants']['lambda_lo'] < 1 < outputs['constants']['lambda_hi']
        assert outputs['moment_bounds_hold'] is True
        assert [ball['n'] for ball in outputs['ball']] == [64, 256]
        assert all(ball['slack_bits'] > 0 for ball in outputs['ball'])
        assert all(sweep['holds'] for sweep in outputs['typicality'])

    def test_cumulant_only(self, temp_dir):
        """The cumulant verb reports one cumulant and nothing else."""
        out = temp_dir / 'tilt.json'
        result = CliRunner().invoke(cli, [
            'tilt-lab', 'cumulant', '--lambda', '0.7', '--y', '0', '--out', str(out),
        ])
        assert result.exit_code == 0
        record = read_record(out)
        outputs = record['outputs']
        assert outputs['cumulant']['lambda'] == 0.7
        assert outputs['cumulant']['y'] == 0
        assert outputs['direct_sum_error'] <= 1e-10
        assert 'typicality' not in outputs
        assert 'ball' not in outputs
        assert 'dominance_margin' not in outputs
        assert 'n0' in outputs['constants']
        assert record['inputs']['tilt_section'] == 'cumulant'
        assert 'n_list' not in record['inputs']

    def test_cumulant_selection(self, temp_dir):
        """--lambda and --y select the reported cumulant."""
        out = temp_dir / 'tilt.json'
        result = CliRunner().invoke(cli, [
            'tilt-lab', 'cumulant', '--lambda', '1.2', '--y', '1', '--out', str(out),
        ])
        assert result.exit_code == 0
        cumulant = read_record(out)['outputs']['cumulant']
        assert cumulant['lambda'] == 1.2
        assert cumulant['y'] == 1
        assert cumulant['d2'] > 0

    def test_dominance(self, temp_dir):
        out = temp_dir / 'tilt.json'
        result = CliRunner().invoke(cli, ['tilt-lab', 'dominance', '--out', str(out)])
        assert result.exit_code == 0
        outputs = read_record(out)['outputs']
        assert outputs['dominance_margin'] >= -1e-12
        assert outputs['moment_bounds_hold'] is True
        assert 'cumulant' not in outputs

    def test_typicality(self, temp_dir):
        out = temp_dir / 'tilt.json'
        result = CliRunner().invoke(cli, [
            'tilt-lab', 'typicality', '--n-list', '64,256', '--samples', '200', '--out', str(out),
        ])
        assert result.exit_code == 0
        outputs = read_record(out)['outputs']
        assert [sweep['n'] for sweep in outputs['typicality']] == [64, 256]
        assert 'ball' not in outputs

    def test_ball(self, temp_dir):
        out = temp_dir / 'tilt.json'
        result = CliRunner().invoke(cli, ['tilt-lab', 'ball', '--n-list', '64,256', '--out', str(out)])
        assert result.exit_code == 0
        outputs = read_record(out)['outputs']
        assert [ball['n'] for ball in outputs['ball']] == [64, 256]
        assert 'typicality' not in outputs

    def test_verb_is_required(self):
        """A bare tilt-lab prints its usage instead of running anything."""
        result = CliRunner().invoke(cli, ['tilt-lab'])
        assert 'cumulant' in result.output
        assert 'typicality' in result.output

    def test_singular_channel(self):
        """Singular channels have no operating interval."""
        result = CliRunner().invoke(cli, ['tilt-lab', 'cumulant', '--channel', 'identity'])
        assert result.exit_code == 1

    def test_large_epsilon(self):
        """An epsilon that leaves no variance floor is a configuration error."""
        result = CliRunner().invoke(cli, ['tilt-lab', 'dominance', '--epsilon', '0.5'])
        assert result.exit_code == 2

    def test_section_from_config(self, temp_dir):
        """tilt_section in a config file is overridden by the verb."""
        config = temp_dir / 'exp.json'
        config.write_text(json.dumps({'tilt_section': 'ball', 'n_list': [64]}))
        out = temp_dir / 'tilt.json'
        result = CliRunner().invoke(cli, ['tilt-lab', 'cumulant', '--config', str(config),
                                          '--out', str(out)])
        assert result.exit_code == 0
        assert read_record(out)['outputs']['section'] == 'cumulant'
