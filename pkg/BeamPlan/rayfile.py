"""
Ray file I/O

CSV with a leading '# key=value' metadata block and the header
offset_aoa_deg,amplitude,phase_rad,delay_s. A power_dbm column may
replace amplitude, or "# amplitude_unit=dbm" tags the amplitude column as dBm
(specular_power_dbm may replace specular_amplitude);
values are converted to sqrt(mW) on read.
"""

import csv
import io
import logging
import math
import os
from typing import Dict, List, Optional

from BeamPlan.exceptions import ConfigError, RayFileError
from BeamPlan.models import ClusterProfile, Ray

logger = logging.getLogger(__name__)

AMPLITUDE_COLUMNS = ['offset_aoa_deg', 'amplitude', 'phase_rad', 'delay_s']
DBM_COLUMNS = ['offset_aoa_deg', 'power_dbm', 'phase_rad', 'delay_s']

# Metadata keys consumed by the reader; everything else is kept on ClusterProfile.metadata
_CLUSTER_KEYS = {'specular_aoa_deg', 'specular_amplitude', 'specular_power_dbm',
                 'specular_toa_s', 'specular_phase_rad', 'sas_deg', 'amplitude_unit'}


def _dbm_to_amplitude(dbm: float) -> float:
    if dbm == -math.inf:
        return 0.0
    return math.sqrt(10.0 ** (dbm / 10.0))


def _parse_float(text: str, what: str, line_number: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise RayFileError(f'{what} is not a number: {text!r}', line_number)
    if math.isnan(value):
        raise RayFileError(f'{what} is NaN', line_number)
    return value


def parse_ray_csv(text: str, source: str = '<string>') -> ClusterProfile:
    metadata: Dict[str, str] = {}
    header: Optional[List[str]] = None
    rays: List[Ray] = []

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            if header is not None:
                continue
            body = line[1:].strip()
            if '=' not in body:
                continue
            key, value = body.split('=', 1)
            metadata[key.strip()] = value.strip()
            continue

        cells = next(csv.reader([line]))
        cells = [c.strip() for c in cells]
        if header is None:
            if cells not in (AMPLITUDE_COLUMNS, DBM_COLUMNS):
                raise RayFileError(
                    f'expected header {",".join(AMPLITUDE_COLUMNS)} (or with power_dbm), got {line!r}',
                    line_number)
            header = cells
            continue

        if len(cells) != len(header):
            raise RayFileError(f'expected {len(header)} columns, got {len(cells)}', line_number)
        values = [_parse_float(cell, name, line_number) for cell, name in zip(cells, header)]
        offset, level, phase, delay = values
        in_dbm = header == DBM_COLUMNS or metadata.get('amplitude_unit', '').lower() == 'dbm'
        amplitude = _dbm_to_amplitude(level) if in_dbm else level
        try:
            rays.append(Ray(amplitude=amplitude, offset_aoa_deg=offset, phase_rad=phase, delay_s=delay))
        except ConfigError as exc:
            raise RayFileError(str(exc), line_number)

    if header is None:
        raise RayFileError(f'{source}: no header row found')
    if 'specular_aoa_deg' not in metadata:
        raise RayFileError(f'{source}: missing metadata "# specular_aoa_deg=..."')

    def meta_float(key: str, default: Optional[float] = None) -> Optional[float]:
        if key not in metadata:
            return default
        return _parse_float(metadata[key], key, None)

    if 'specular_power_dbm' in metadata:
        specular_amplitude = _dbm_to_amplitude(meta_float('specular_power_dbm'))
    else:
        specular_amplitude = meta_float('specular_amplitude', 0.0)

    try:
        cluster = ClusterProfile(
            specular_amplitude=specular_amplitude,
            specular_aoa_deg=meta_float('specular_aoa_deg'),
            specular_phase_rad=meta_float('specular_phase_rad', 0.0),
            specular_toa_s=meta_float('specular_toa_s', 0.0),
            diffuse=tuple(rays),
            sas_deg=meta_float('sas_deg'),
            metadata={k: v for k, v in metadata.items() if k not in _CLUSTER_KEYS},
        )
    except ConfigError as exc:
        raise RayFileError(f'{source}: {exc}')
    logger.debug('Read %d diffuse rays from %s', cluster.n_rays, source)
    return cluster


def read_ray_file(path) -> ClusterProfile:
    path = os.fspath(path)
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f'cannot read ray file {path}: {exc.strerror or exc}')
    except UnicodeDecodeError as exc:
        raise RayFileError(f'{path}: not valid UTF-8 at byte {exc.start} ({exc.reason})')
    return parse_ray_csv(text, source=path)


def format_ray_csv(cluster: ClusterProfile, extra_metadata: Optional[Dict[str, object]] = None) -> str:
    buffer = io.StringIO()
    meta = {
        'specular_aoa_deg': cluster.specular_aoa_deg,
        'specular_amplitude': cluster.specular_amplitude,
        'specular_toa_s': cluster.specular_toa_s,
        'specular_phase_rad': cluster.specular_phase_rad,
        'sas_deg': cluster.sas_deg,
    }
    meta.update(cluster.metadata)
    meta.update(extra_metadata or {})
    for key, value in meta.items():
        buffer.write(f'# {key}={value!r}\n' if isinstance(value, float) else f'# {key}={value}\n')

    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(AMPLITUDE_COLUMNS)
    for ray in cluster.diffuse:
        writer.writerow([repr(ray.offset_aoa_deg), repr(ray.amplitude), repr(ray.phase_rad), repr(ray.delay_s)])
    return buffer.getvalue()


def write_ray_file(cluster: ClusterProfile, path, extra_metadata: Optional[Dict[str, object]] = None) -> str:
    path = os.fspath(path)
    text = format_ray_csv(cluster, extra_metadata)
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
    except OSError as exc:
        raise ConfigError(f'cannot write ray file {path}: {exc.strerror or exc}')
    logger.info('Wrote %d rays to %s', cluster.n_rays, path)
    return path
