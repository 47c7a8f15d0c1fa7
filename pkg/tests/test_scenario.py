import os

import pytest

from BeamPlan.exceptions import ConfigError
from BeamPlan.models import ClusterProfile, GaussianFit, GaussianPas
from BeamPlan.scenario import (
    DEFAULT_ETAS,
    DEFAULT_RANGE,
    load_scenario,
    parse_etas,
    parse_range,
    scenario_from_dict,
)


def test_load_set4_fixture(fixture_path):
    scenario = load_scenario(fixture_path('set4_sigma5.toml'))
    assert scenario.channel == GaussianPas(sigma_deg=5.0, cluster_aoa_deg=90.0, total_power_mw=1.0)
    assert scenario.parameter_set.id == 4
    assert scenario.parameter_set.prefactor_override == 45.9
    assert scenario.etas == (0.5, 0.95)
    assert scenario.sweep_range == (0.5, 13.5, 0.1)
    assert scenario.source == fixture_path('set4_sigma5.toml')


def test_exact_flag_reaches_the_parameter_set(fixture_path):
    scenario = load_scenario(fixture_path('set4_sigma5.toml'), exact_eq13=True)
    assert not scenario.parameter_set.is_overridden


def test_fit_channel(fixture_path):
    scenario = load_scenario(fixture_path('fitted_channel.toml'))
    assert scenario.channel == GaussianFit(u=6.434e-5, x_deg=90.0, v_deg=9.23)
    assert scenario.sweep_range == DEFAULT_RANGE


def test_ray_file_is_resolved_next_to_the_scenario(fixture_path):
    scenario = load_scenario(fixture_path('rays_scenario.toml'))
    assert isinstance(scenario.channel, ClusterProfile)
    assert scenario.channel.n_rays == 38
    assert scenario.bin_width_deg == 1.9


def test_defaults():
    scenario = scenario_from_dict({'channel': {'sigma_deg': 10.0}})
    assert scenario.parameter_set.id == 4
    assert scenario.etas == DEFAULT_ETAS
    assert scenario.wavelength_m == 0.005
    assert scenario.phi0_deg == 90.0


def test_preset_with_dbm_power():
    scenario = scenario_from_dict({'channel': {'preset': 'living_room', 'total_power_dbm': -30.0}})
    assert scenario.channel.sigma_deg == 10.0
    assert scenario.channel.total_power_mw == pytest.approx(1e-3)


def test_custom_parameter_set():
    data = {
        'channel': {'sigma_deg': 5.0},
        'antenna': {'set': 'custom', 'delta_phi_y_deg': 8.0, 'delta_theta_deg': 40.0, 'theta0_deg': 70.0,
                    'prefactor': 30.0},
    }
    parameter_set = scenario_from_dict(data).parameter_set
    assert parameter_set.id == 'custom'
    assert parameter_set.delta_phi_y_deg == 8.0
    assert parameter_set.prefactor_override == 30.0
    assert parameter_set.k_override is None


@pytest.mark.parametrize('data, message', [
    ({'channel': {'model': 'laplacian'}}, 'model must be one of'),
    ({'channel': {}}, 'sigma_deg'),
    ({'channel': {'sigma_deg': -1.0}}, 'must be > 0'),
    ({'channel': {'sigma_deg': 'five'}}, 'must be a number'),
    ({'channel': {'sigma_deg': 5.0, 'total_power_mw': 1.0, 'total_power_dbm': 0.0}}, 'not both'),
    ({'channel': {'preset': 'conference', 'sigma_deg': 5.0}}, 'not both'),
    ({'channel': {'preset': 'outdoor'}}, 'unknown channel preset'),
    ({'channel': {'model': 'fit', 'u': 1e-4}}, 'v_deg'),
    ({'channel': {'model': 'rays'}}, 'ray_file'),
    ({'channel': {'sigma_deg': 5.0}, 'antenna': {'set': 9}}, 'unknown parameter set'),
    ({'channel': {'sigma_deg': 5.0}, 'antenna': {'set': 'custom', 'delta_phi_y_deg': 8.0}}, 'delta_theta_deg'),
    ({'channel': {'sigma_deg': 5.0}, 'solve': {'eta': [0.5, 1.0]}}, 'eta'),
    ({'channel': {'sigma_deg': 5.0}, 'sweep': {'range': '1:2'}}, 'lo:hi:step'),
    ({'channel': {'sigma_deg': 5.0}, 'link': {'wavelength_m': 0.0}}, 'wavelength_m'),
    ({'channel': 'gaussian'}, 'must be a table'),
])
def test_invalid_scenarios(data, message):
    with pytest.raises(ConfigError, match=message):
        scenario_from_dict(data)


def test_missing_scenario_file(tmp_path):
    with pytest.raises(ConfigError, match='cannot read scenario'):
        load_scenario(tmp_path / 'nope.toml')


def test_invalid_toml(tmp_path):
    path = tmp_path / 'broken.toml'
    path.write_text('[channel\nsigma_deg = 5\n')
    with pytest.raises(ConfigError, match='invalid TOML'):
        load_scenario(path)


def test_binary_scenario_is_config_error(tmp_path):
    path = tmp_path / 'binary.toml'
    path.write_bytes(b'[channel]\nsigma_deg = \xff\xfe\n')
    with pytest.raises(ConfigError, match='invalid TOML'):
        load_scenario(path)


def test_parse_range():
    assert parse_range('0.5:13.5:0.1') == (0.5, 13.5, 0.1)
    assert parse_range([1, 2, 0.5]) == (1.0, 2.0, 0.5)
    for bad in ('a:b:c', '1:2:0', '3:2:1', '0:1:0.1', '1:inf:1'):
        with pytest.raises(ConfigError):
            parse_range(bad)


def test_parse_etas():
    assert parse_etas('0.5, 0.9,0.95') == (0.5, 0.9, 0.95)
    assert parse_etas([0.25]) == (0.25,)
    for bad in ('', '0.5,x', '0'):
        with pytest.raises(ConfigError):
            parse_etas(bad)


@pytest.mark.parametrize('name', ['conference_set4.toml', 'conference_fit.toml', 'living_room_set2.toml',
                                  'custom_array.toml'])
def test_bundled_scenarios_load(name):
    root = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'scenarios')
    scenario = load_scenario(os.path.join(root, name))
    assert scenario.etas
