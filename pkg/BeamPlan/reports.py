"""
CSV and manifest output for BeamPlan commands

CSV files are UTF-8 with LF line endings, a header row and unquoted
numeric cells; floats are written with repr so reruns are byte-identical.
Every output gets a <name>.manifest.json next to it unless
BEAMPLAN_NO_MANIFEST is set.
"""

import csv
import hashlib
import json
import logging
import math
import os
from dataclasses import astuple, fields
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Sequence

from BeamPlan.app import VERSION, Settings
from BeamPlan.exceptions import ConfigError
from BeamPlan.models import ComparisonRow, RunManifest, SweepRow

logger = logging.getLogger(__name__)


def _now_utc() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).strftime('%Y-%m-%dT%H:%M:%SZ')


def _ensure_parent_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def _stable_json_sha256(payload: object) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'), ensure_ascii=True)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(65536), b''):
            digest.update(chunk)
    return digest.hexdigest()


def format_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return ''
        return repr(value)
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    path = os.fspath(path)
    try:
        _ensure_parent_dir(path)
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            count = 0
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
                count += 1
    except OSError as exc:
        raise ConfigError(f'cannot write {path}: {exc.strerror or exc}')
    logger.info('Wrote %d rows to %s', count, path)
    return path


def write_json(path, payload: Dict[str, object]) -> str:
    path = os.fspath(path)
    try:
        _ensure_parent_dir(path)
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            json.dump(payload, handle, indent=2, sort_keys=True, default=str)
            handle.write('\n')
    except OSError as exc:
        raise ConfigError(f'cannot write {path}: {exc.strerror or exc}')
    return path


SWEEP_HEADER = [f.name for f in fields(SweepRow)]
COMPARISON_HEADER = [f.name for f in fields(ComparisonRow)]
SOLVE_HEADER = ['eta', 'delta_phi_deg', 'm_elements', 'n_elements', 'total_elements',
                'received_power_mw', 'received_power_dbm', 'status']
SOLVE_VERIFY_HEADER = SOLVE_HEADER + ['scan_delta_phi_deg', 'scan_abs_diff_deg']
ELEMENTS_HEADER = ['architecture', 'delta_phi_deg', 'elements', 'received_power_mw', 'received_power_dbm']


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> str:
    return write_csv(path, SWEEP_HEADER, (astuple(r) for r in rows))


def write_comparison_csv(path, rows: Sequence[ComparisonRow]) -> str:
    return write_csv(path, COMPARISON_HEADER, (astuple(r) for r in rows))


def manifest_path_for(output_path: str) -> str:
    return f'{output_path}.manifest.json'


def build_manifest(command: str, scenario_path: Optional[str], output_paths: List[str],
                   parameters: Dict[str, object]) -> RunManifest:
    return RunManifest(
        command=command,
        scenario_path=scenario_path,
        output_paths=list(output_paths),
        timestamp=_now_utc(),
        tool_version=VERSION,
        parameters=dict(parameters),
    )


def write_manifest(manifest: RunManifest, settings: Optional[Settings] = None) -> Optional[str]:
    """Write the manifest next to the first output; returns its path or None when disabled"""
    settings = settings or Settings.from_env()
    if settings.no_manifest:
        logger.debug('Manifest suppressed by BEAMPLAN_NO_MANIFEST')
        return None
    if not manifest.output_paths:
        return None
    payload = manifest.to_dict()
    payload['parameters_sha256'] = _stable_json_sha256(manifest.parameters)
    payload['output_sha256'] = {
        path: _file_sha256(path) for path in manifest.output_paths if os.path.exists(path)
    }
    path = write_json(manifest_path_for(manifest.output_paths[0]), payload)
    logger.info('Wrote manifest %s', path)
    return path
