"""Experiment records and their CSV / JSON serialization."""

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from csdlab import __version__

SCHEMA_VERSION = 1

SWEEP_COLUMNS = (
    'n',
    'expected_dcs_bits',
    'block_mi_bits',
    'gap_bits',
    'gap_over_lbn',
    'stderr_bits',
    'mode',
    'seed',
)


@dataclass
class ExperimentRecord:
    """
    Self-describing result of one experiment item.

    ``inputs`` echoes every setting the outputs depend on, so the record can
    be rerun. ``wall_seconds`` is only serialized when timing is requested.
    """

    experiment: str
    inputs: Dict[str, Any]
    outputs: Dict[str, Any]
    passed: bool = True
    wall_seconds: Optional[float] = None
    version: str = __version__
    schema_version: int = SCHEMA_VERSION
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data = {
            'experiment': self.experiment,
            'inputs': self.inputs,
            'outputs': self.outputs,
            'passed': self.passed,
            'version': self.version,
            'schema_version': self.schema_version,
        }
        if self.rows:
            data['rows'] = self.rows
        if include_timing and self.wall_seconds is not None:
            data['wall_seconds'] = self.wall_seconds
        return jsonable(data)

    def __repr__(self) -> str:
        status = 'pass' if self.passed else 'FAIL'
        return f"ExperimentRecord({self.experiment}, {status}, {len(self.outputs)} outputs)"


def jsonable(value: Any) -> Any:
    """
    Convert numpy scalars, arrays and tuples to JSON types.

    Non-finite floats become the strings "inf", "-inf" and "nan" so the
    output stays strict JSON.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')
    return value


def render_json(records: Sequence[ExperimentRecord], include_timing: bool = False) -> str:
    document = {
        'schema_version': SCHEMA_VERSION,
        'version': __version__,
        'records': [r.to_dict(include_timing) for r in records],
    }
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + '\n'


def _flatten(prefix: str, value: Any, out: Dict[str, Any]) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], out)
    elif isinstance(value, list):
        out[prefix] = json.dumps(value, sort_keys=True)
    else:
        out[prefix] = value


def _csv_rows(record: ExperimentRecord) -> List[Dict[str, Any]]:
    data = record.to_dict()
    if record.rows:
        return [dict(row, experiment=record.experiment) for row in data['rows']]
    row: Dict[str, Any] = {'experiment': record.experiment, 'passed': record.passed}
    _flatten('', data['outputs'], row)
    return [row]


def csv_columns(records: Sequence[ExperimentRecord]) -> List[str]:
    """
    Stable header: the sweep layout for sweep records, otherwise the sorted
    union of flattened output keys.
    """
    if records and all(r.experiment == 'redundancy-sweep' for r in records):
        return ['experiment', *SWEEP_COLUMNS, 'schema_version']
    keys = set()
    for record in records:
        for row in _csv_rows(record):
            keys.update(row)
    keys.discard('experiment')
    return ['experiment', *sorted(keys), 'schema_version']


def render_csv(records: Sequence[ExperimentRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer, fieldnames=csv_columns(records), extrasaction='ignore', lineterminator='\n'
    )
    writer.writeheader()
    for record in records:
        for row in _csv_rows(record):
            writer.writerow(dict(row, schema_version=SCHEMA_VERSION))
    return buffer.getvalue()


def render(records: Sequence[ExperimentRecord], fmt: str, include_timing: bool = False) -> str:
    if fmt == 'csv':
        return render_csv(records)
    return render_json(records, include_timing)


def atomic_write(path: Union[str, Path], text: str) -> Path:
    """Write text through a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_records(
    records: Iterable[ExperimentRecord],
    path: Union[str, Path],
    fmt: str = 'json',
    include_timing: bool = False,
) -> Path:
    """Serialize records and write them atomically."""
    return atomic_write(path, render(list(records), fmt, include_timing))
