"""Experiment configuration.

An experiment is described by one JSON document. Values are resolved
with the following precedence (highest first):

1. Explicit overrides (command-line flags)
2. Environment variables (CSDLAB_<FIELD>, e.g. CSDLAB_SEED)
3. The JSON config file
4. Dataclass defaults
"""

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from csdlab.core.errors import ConfigError

EXPERIMENTS = ('divergence', 'redundancy-sweep', 'simulate', 'tilt-lab', 'verify-all')
OUTPUT_FORMATS = ('json', 'csv')
MODES = ('exact', 'monte_carlo')
TILT_SECTIONS = ('all', 'cumulant', 'dominance', 'typicality', 'ball')
ENV_PREFIX = 'CSDLAB_'
DEFAULT_CHANNEL = 'bsc_011'
# Sample sizes of the verify-all exactness and CLT criteria
EXACTNESS_SAMPLES = 1_000_000
CLT_SAMPLES = 100_000

_N_LIST_REQUIRED = ('redundancy-sweep', 'tilt-lab')


def _default_n_list() -> List[int]:
    return [2 ** k for k in range(6, 14)]


@dataclass
class ExperimentConfig:
    """
    Inputs of one experiment run.

    ``channel_path`` may name a JSON channel file or the stem of a bundled
    fixture (``bsc_011``, ``identity``, ...). ``channels`` lists the channel
    set used by verify-all; empty means every bundled fixture.
    ``tilt_section`` picks one tilt-lab report or ``all`` of them.
    """

    experiment: str = 'divergence'
    channel_path: str = DEFAULT_CHANNEL
    seed: int = 0
    n_list: List[int] = field(default_factory=_default_n_list)
    samples: int = 10_000
    exactness_samples: int = EXACTNESS_SAMPLES
    clt_samples: int = CLT_SAMPLES
    epsilon: float = 0.01
    lambda_grid_resolution: float = 1e-3
    output_path: Optional[str] = None
    output_format: str = 'json'
    mode: str = 'exact'
    num_seeds: int = 500
    max_proposals: int = 1_000_000
    level_cap: int = 2_000_000
    radius_offset: float = 0.01
    tilt_lambda: float = 0.7
    tilt_y: int = 0
    tilt_section: str = 'all'
    y_values: List[float] = field(default_factory=lambda: [-1.0, 0.0, 1.0])
    channels: List[str] = field(default_factory=list)
    include_timing: bool = False
    tolerances: Dict[str, float] = field(default_factory=dict)

    def validate(self) -> 'ExperimentConfig':
        """
        Check field invariants.

        Raises:
            ConfigError: On the first invalid field
        """
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment '{self.experiment}'")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.samples < 1:
            raise ConfigError("samples must be at least 1")
        if self.exactness_samples < 1 or self.clt_samples < 1:
            raise ConfigError("exactness_samples and clt_samples must be at least 1")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if not 0 < self.lambda_grid_resolution < 0.5:
            raise ConfigError("lambda_grid_resolution must lie in (0, 0.5)")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output_format must be one of {', '.join(OUTPUT_FORMATS)}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        if self.tilt_section not in TILT_SECTIONS:
            raise ConfigError(f"tilt_section must be one of {', '.join(TILT_SECTIONS)}")
        if self.experiment in _N_LIST_REQUIRED and not self.n_list:
            raise ConfigError(f"n_list is required for {self.experiment}")
        if any(n < 1 for n in self.n_list):
            raise ConfigError("n_list entries must be positive")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ConfigError("n_list must be strictly increasing")
        if self.num_seeds < 100:
            raise ConfigError("num_seeds must be at least 100")
        if self.max_proposals < 1 or self.level_cap < 1:
            raise ConfigError("max_proposals and level_cap must be positive")
        if self.radius_offset <= 0:
            raise ConfigError("radius_offset must be positive")
        return self

    def tolerance(self, name: str, default: float) -> float:
        """A named tolerance, overridable through the ``tolerances`` table."""
        return float(self.tolerances.get(name, default))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(name: str, value: Any) -> Any:
    """Convert a raw file or environment value to the field's type."""
    kind = _FIELD_TYPES[name]
    try:
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            return int(value)
        if kind is float:
            return float(value)
        if kind is bool:
            if isinstance(value, str):
                lowered = value.strip().lower()
                if lowered not in ('1', '0', 'true', 'false', 'yes', 'no'):
                    raise ValueError(value)
                return lowered in ('1', 'true', 'yes')
            return bool(value)
        if kind is str:
            return str(value)
        if kind == Optional[str]:
            return None if value is None else str(value)
        if kind == List[int]:
            items = value.split(',') if isinstance(value, str) else value
            return [_coerce_int(item) for item in items if str(item).strip()]
        if kind == List[float]:
            items = value.split(',') if isinstance(value, str) else value
            return [float(item) for item in items if str(item).strip()]
        if kind == List[str]:
            items = value.split(',') if isinstance(value, str) else value
            return [str(item).strip() for item in items if str(item).strip()]
        if kind == Dict[str, float]:
            table = json.loads(value) if isinstance(value, str) else value
            return {str(k): float(v) for k, v in dict(table).items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {name}: {value!r}") from exc
    raise ConfigError(f"unsupported field {name}")


def _coerce_int(item: Any) -> int:
    if isinstance(item, float) and not item.is_integer():
        raise ValueError(item)
    return int(item)


class Config:
    """
    Layered reader for experiment settings.

    The JSON file is read lazily; environment variables named
    CSDLAB_<FIELD> override it.
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        self.config_path = Path(config_path) if config_path else None
        self._file_values: Optional[Dict[str, Any]] = None

    @property
    def file_values(self) -> Dict[str, Any]:
        """Parsed JSON document, or an empty table without a file."""
        if self._file_values is None:
            self._file_values = {}
            if self.config_path is not None:
                self._file_values = self._read_file(self.config_path)
        return self._file_values

    @staticmethod
    def _read_file(path: Path) -> Dict[str, Any]:
        try:
            with open(path, 'r') as f:
                document = json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise ConfigError("config document must be a JSON object")
        unknown = sorted(set(document) - set(_FIELD_TYPES))
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        return document

    def get(self, key: str, fallback: Any = None) -> Any:
        """
        Get one setting.

        Priority order (highest to lowest):
        1. Environment variable (CSDLAB_<KEY>)
        2. Config file
        3. Fallback value
        """
        env_value = os.environ.get(f"{ENV_PREFIX}{key.upper()}")
        if env_value is not None:
            return _coerce(key, env_value)
        if key in self.file_values:
            return _coerce(key, self.file_values[key])
        return fallback

    def load(self, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """
        Build and validate an ExperimentConfig.

        Args:
            overrides: Values taking precedence over everything else; None
                entries are ignored
        """
        defaults = ExperimentConfig()
        values = {name: self.get(name, getattr(defaults, name)) for name in _FIELD_TYPES}
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config field: {key}")
            values[key] = _coerce(key, value)
        return ExperimentConfig(**values).validate()


def get_config(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Load an experiment config.

    Args:
        config_path: JSON config file, or None for defaults and environment
        overrides: Command-line values

    Returns:
        Validated ExperimentConfig
    """
    return Config(config_path).load(overrides)
