"""
Built-in parameter sets and channel presets

The four UPA parameter sets of the conference-room case study, the IEEE
802.11ad intra-cluster presets and the fitted conference-room cluster.
Set 4 ships with its tabulated coefficients (A=45.9, K=190) unless the
exact factorization is requested.
"""

import logging
from typing import Dict, List, Union

from BeamPlan.exceptions import ConfigError
from BeamPlan.models import GaussianFit, GaussianPas, UpaParameterSet

logger = logging.getLogger(__name__)

_PARAMETER_SETS: Dict[int, UpaParameterSet] = {
    1: UpaParameterSet(id=1, delta_phi_y_deg=14.5, delta_theta_deg=30.0, theta0_deg=75.0),
    2: UpaParameterSet(id=2, delta_phi_y_deg=14.5, delta_theta_deg=40.0, theta0_deg=70.0),
    3: UpaParameterSet(id=3, delta_phi_y_deg=10.15, delta_theta_deg=40.0, theta0_deg=70.0),
    4: UpaParameterSet(id=4, delta_phi_y_deg=10.15, delta_theta_deg=30.0, theta0_deg=60.0,
                       prefactor_override=45.9, k_override=190.0),
}

# Tabulated coefficients for each set: (A, K, sign)
TABULATED_COEFFICIENTS = {
    1: (20.0, 84.68, 1),
    2: (5.91, 1703.0, 1),
    3: (22.93, 229.0, -1),
    4: (45.9, 190.0, -1),
}

# 802.11ad intra-cluster azimuth spread (deg) per environment
IEEE_80211AD_SIGMA_DEG = {
    'conference': 5.0,
    'cubicle': 5.0,
    'living_room': 10.0,
}

# Gaussian fit of the measured conference-room first-order cluster
CONFERENCE_CLUSTER_FIT = GaussianFit(u=6.434e-5, x_deg=90.0, v_deg=9.23)
CONFERENCE_CLUSTER_SAS_DEG = 72.2
CONFERENCE_CLUSTER_POWER_DBM = -29.09


def _coerce_id(set_id: Union[int, str]) -> int:
    try:
        return int(set_id)
    except (TypeError, ValueError):
        raise ConfigError(f'unknown parameter set {set_id!r}; expected one of {sorted(_PARAMETER_SETS)}')


def get_parameter_set(set_id: Union[int, str], exact_eq13: bool = False) -> UpaParameterSet:
    key = _coerce_id(set_id)
    if key not in _PARAMETER_SETS:
        raise ConfigError(f'unknown parameter set {set_id!r}; expected one of {sorted(_PARAMETER_SETS)}')
    parameter_set = _PARAMETER_SETS[key]
    if exact_eq13 and parameter_set.is_overridden:
        logger.info('Set %s: using computed coefficients instead of tabulated ones', key)
        return parameter_set.exact()
    return parameter_set


def list_parameter_sets(exact_eq13: bool = False) -> List[UpaParameterSet]:
    return [get_parameter_set(key, exact_eq13) for key in sorted(_PARAMETER_SETS)]


def channel_preset(name: str, total_power_mw: float = 1.0, cluster_aoa_deg: float = 90.0) -> GaussianPas:
    key = name.strip().lower().replace('-', '_').replace(' ', '_')
    if key not in IEEE_80211AD_SIGMA_DEG:
        raise ConfigError(f'unknown channel preset {name!r}; expected one of {sorted(IEEE_80211AD_SIGMA_DEG)}')
    return GaussianPas(sigma_deg=IEEE_80211AD_SIGMA_DEG[key], cluster_aoa_deg=cluster_aoa_deg,
                       total_power_mw=total_power_mw)
