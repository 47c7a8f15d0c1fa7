"""
Scenario loading for BeamPlan

A scenario is a TOML file with [channel], [antenna], [solve], [sweep]
and [link] sections. Every field is validated here and problems are
raised as ConfigError naming the section and key.
"""

import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from BeamPlan.exceptions import ConfigError
from BeamPlan.models import GaussianFit, GaussianPas, ScenarioConfig, UpaParameterSet
from BeamPlan.rayfile import read_ray_file
from BeamPlan.registry import channel_preset, get_parameter_set

logger = logging.getLogger(__name__)

CHANNEL_MODELS = ('gaussian', 'fit', 'rays')
DEFAULT_ETAS = (0.5, 0.9, 0.95)
DEFAULT_RANGE = (0.5, 13.5, 0.1)
DEFAULT_SET = 4

Section = Dict[str, Any]


def _number(section: Section, name: str, key: str, default: Optional[float] = None,
            positive: bool = False) -> Optional[float]:
    if key not in section:
        if default is None:
            return None
        return float(default)
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'[{name}] {key} must be a number, got {value!r}')
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f'[{name}] {key} must be finite')
    if positive and value <= 0:
        raise ConfigError(f'[{name}] {key} must be > 0, got {value}')
    return value


def _required(section: Section, name: str, key: str, positive: bool = False) -> float:
    if key not in section:
        raise ConfigError(f'[{name}] is missing required key {key!r}')
    return _number(section, name, key, positive=positive)


def parse_range(text: Union[str, Sequence[float]]) -> Tuple[float, float, float]:
    """'lo:hi:step' (or a three-element list) to a validated triple"""
    if isinstance(text, str):
        parts = text.split(':')
    else:
        parts = list(text)
    if len(parts) != 3:
        raise ConfigError(f'range must look like lo:hi:step, got {text!r}')
    try:
        lo, hi, step = (float(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f'range values must be numbers, got {text!r}')
    if not all(math.isfinite(v) for v in (lo, hi, step)):
        raise ConfigError(f'range values must be finite, got {text!r}')
    if step <= 0 or lo <= 0 or hi < lo:
        raise ConfigError(f'range must satisfy 0 < lo <= hi and step > 0, got {text!r}')
    return lo, hi, step


def parse_etas(values: Union[str, Sequence[float]]) -> Tuple[float, ...]:
    if isinstance(values, str):
        values = [v for v in values.replace(' ', '').split(',') if v]
    try:
        etas = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ConfigError(f'eta values must be numbers, got {values!r}')
    if not etas:
        raise ConfigError('at least one eta value is required')
    for eta in etas:
        if not 0 < eta < 1:
            raise ConfigError(f'eta values must lie in (0, 1), got {eta}')
    return etas


def channel_from_section(section: Section, base_dir: str = '.'):
    model = str(section.get('model', 'gaussian')).lower()
    if model not in CHANNEL_MODELS:
        raise ConfigError(f'[channel] model must be one of {", ".join(CHANNEL_MODELS)}, got {model!r}')

    if model == 'gaussian':
        if 'total_power_mw' in section and 'total_power_dbm' in section:
            raise ConfigError('[channel] give total_power_mw or total_power_dbm, not both')
        power = _number(section, 'channel', 'total_power_mw', 1.0, positive=True)
        if 'total_power_dbm' in section:
            power = 10.0 ** (_number(section, 'channel', 'total_power_dbm') / 10.0)
        aoa = _number(section, 'channel', 'cluster_aoa_deg', 90.0)
        if 'preset' in section:
            if 'sigma_deg' in section:
                raise ConfigError('[channel] give preset or sigma_deg, not both')
            return channel_preset(str(section['preset']), total_power_mw=power, cluster_aoa_deg=aoa)
        return GaussianPas(sigma_deg=_required(section, 'channel', 'sigma_deg', positive=True),
                           cluster_aoa_deg=aoa, total_power_mw=power)

    if model == 'fit':
        return GaussianFit(u=_required(section, 'channel', 'u', positive=True),
                           x_deg=_number(section, 'channel', 'x_deg', 90.0),
                           v_deg=_required(section, 'channel', 'v_deg', positive=True))

    if 'ray_file' not in section:
        raise ConfigError("[channel] model 'rays' needs ray_file")
    ray_path = os.path.join(base_dir, str(section['ray_file']))
    return read_ray_file(ray_path)


def parameter_set_from_section(section: Section, exact_eq13: bool = False) -> UpaParameterSet:
    exact = bool(section.get('exact_eq13', exact_eq13))
    choice = section.get('set', DEFAULT_SET)
    if str(choice).lower() != 'custom':
        return get_parameter_set(choice, exact_eq13=exact)
    prefactor = None if exact else _number(section, 'antenna', 'prefactor', positive=True)
    k_override = None if exact else _number(section, 'antenna', 'k', positive=True)
    return UpaParameterSet(
        id='custom',
        delta_phi_y_deg=_required(section, 'antenna', 'delta_phi_y_deg', positive=True),
        delta_theta_deg=_required(section, 'antenna', 'delta_theta_deg', positive=True),
        theta0_deg=_required(section, 'antenna', 'theta0_deg'),
        prefactor_override=prefactor,
        k_override=k_override,
    )


def _section(data: Dict[str, Any], name: str) -> Section:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f'[{name}] must be a table')
    return value


def scenario_from_dict(data: Dict[str, Any], base_dir: str = '.', source: Optional[str] = None,
                       exact_eq13: bool = False) -> ScenarioConfig:
    channel_section = _section(data, 'channel')
    antenna = _section(data, 'antenna')
    solve = _section(data, 'solve')
    sweep = _section(data, 'sweep')
    link = _section(data, 'link')

    return ScenarioConfig(
        channel=channel_from_section(channel_section, base_dir),
        parameter_set=parameter_set_from_section(antenna, exact_eq13),
        wavelength_m=_number(link, 'link', 'wavelength_m', 0.005, positive=True),
        phi0_deg=_number(antenna, 'antenna', 'phi0_deg', 90.0),
        etas=parse_etas(solve['eta']) if 'eta' in solve else DEFAULT_ETAS,
        sweep_range=parse_range(sweep['range']) if 'range' in sweep else DEFAULT_RANGE,
        bin_width_deg=_number(channel_section, 'channel', 'bin_width_deg', 1.0, positive=True),
        source=source,
    )


def load_scenario(path, exact_eq13: bool = False) -> ScenarioConfig:
    path = os.fspath(path)
    try:
        with open(path, 'rb') as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f'cannot read scenario {path}: {exc.strerror or exc}')
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f'{path}: invalid TOML: {exc}')
    scenario = scenario_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)),
                                  source=path, exact_eq13=exact_eq13)
    logger.info('Loaded scenario %s (set %s, %s channel)', path, scenario.parameter_set.id,
                type(scenario.channel).__name__)
    return scenario
