import logging
import math
import warnings

import numpy as np
import pytest

from BeamPlan.antenna import (
    check_constraints,
    directivity_at,
    directivity_coefficients,
    directivity_domain,
    directivity_eq13,
    element_count,
    elements_for_beamwidth,
    solve_delta_phi_x,
    ula_beamwidth_deg,
    ula_directivity,
    ula_directivity_from_beamwidth,
    upa_beamwidths,
    upa_directivity_broadside,
    upa_directivity_from_beamwidths,
)
from BeamPlan.exceptions import ConfigError, DomainError, SmallArrayWarning
from BeamPlan.models import UpaParameterSet
from BeamPlan.registry import (
    TABULATED_COEFFICIENTS,
    channel_preset,
    get_parameter_set,
    list_parameter_sets,
)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def test_registry_lists_sets_in_order():
    assert [s.id for s in list_parameter_sets()] == [1, 2, 3, 4]


def test_registry_set_values():
    s1 = get_parameter_set(1)
    assert (s1.delta_phi_y_deg, s1.delta_theta_deg, s1.theta0_deg) == (14.5, 30.0, 75.0)
    s4 = get_parameter_set('4')
    assert (s4.delta_phi_y_deg, s4.delta_theta_deg, s4.theta0_deg) == (10.15, 30.0, 60.0)
    assert s4.prefactor_override == 45.9
    assert s4.k_override == 190.0


def test_exact_mode_drops_override(set4_exact):
    assert not set4_exact.is_overridden
    assert get_parameter_set(1, exact_eq13=True) == get_parameter_set(1)


@pytest.mark.parametrize('bad', [0, 5, 'custom', None])
def test_unknown_set_is_config_error(bad):
    with pytest.raises(ConfigError):
        get_parameter_set(bad)


def test_channel_presets():
    assert channel_preset('conference').sigma_deg == 5.0
    assert channel_preset('Living-Room').sigma_deg == 10.0
    assert channel_preset('cubicle', total_power_mw=2.0).total_power_mw == 2.0
    with pytest.raises(ConfigError):
        channel_preset('outdoor')


# ---------------------------------------------------------------------------
# Element counts and ULA
# ---------------------------------------------------------------------------

@pytest.mark.parametrize('k', range(1, 201))
def test_element_count_inverts_ula_rule(k):
    assert element_count(101.5 / k) == k


def test_element_count_rounds_up():
    assert element_count(10.0) == 11
    assert element_count(500.0) == 1
    with pytest.raises(DomainError):
        element_count(0.0)


def test_ula_helpers():
    assert ula_beamwidth_deg(19) == pytest.approx(101.5 / 19)
    assert ula_directivity(19) == 19.0
    assert ula_directivity_from_beamwidth(101.5 / 19) == pytest.approx(19.0)
    with pytest.raises(DomainError):
        ula_beamwidth_deg(0)


# ---------------------------------------------------------------------------
# UPA geometry
# ---------------------------------------------------------------------------

def test_broadside_directivity():
    assert upa_directivity_broadside(8, 8, 60.0) == pytest.approx(32.0 * math.pi)


def test_broadside_directivity_warns_for_small_arrays(caplog):
    with caplog.at_level(logging.WARNING, logger='BeamPlan.antenna'):
        with pytest.warns(SmallArrayWarning):
            value = upa_directivity_broadside(4, 4, 0.0)
    assert value == pytest.approx(16.0 * math.pi)
    assert 'large-array regime' in caplog.text


def test_broadside_directivity_no_warning_for_large_arrays():
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        upa_directivity_broadside(7, 10, 30.0)


def test_directivity_from_beamwidths_matches_broadside():
    expected = upa_directivity_broadside(10, 10, 45.0)
    assert upa_directivity_from_beamwidths(10.15, 10.15, 45.0) == pytest.approx(expected)


def test_theta0_out_of_range():
    with pytest.raises(DomainError):
        upa_beamwidths(10.0, 10.0, 90.0, 0.0)


def test_beamwidths_at_phi0_90():
    delta_theta, delta_phi = upa_beamwidths(12.0, 10.0, 60.0, 90.0)
    assert delta_theta == pytest.approx(20.0)
    assert delta_phi == pytest.approx(12.0)


def test_solve_delta_phi_x_roundtrips_random_geometries():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        x = rng.uniform(2.0, 40.0)
        y = rng.uniform(2.0, 40.0)
        theta0 = rng.uniform(0.0, 80.0)
        phi0 = rng.uniform(0.0, 180.0)
        delta_theta, delta_phi = upa_beamwidths(x, y, theta0, phi0)
        assert solve_delta_phi_x(delta_theta, theta0, y, delta_phi) == pytest.approx(x, rel=1e-9)


def test_solve_delta_phi_x_set4_value():
    assert solve_delta_phi_x(30.0, 60.0, 10.15, 3.5) == pytest.approx(3.6186, abs=1e-4)


def test_solve_delta_phi_x_outside_domain():
    with pytest.raises(DomainError, match='Constraint 2'):
        solve_delta_phi_x(30.0, 60.0, 10.15, 14.0)


# ---------------------------------------------------------------------------
# Directivity coefficients
# ---------------------------------------------------------------------------

@pytest.mark.parametrize('set_id, a_coeff, k_coeff, sign', [
    (1, 20.002, 84.53, 1),
    (2, 5.886, 1704.6, 1),
    (3, 22.93, 229.15, -1),
    (4, 36.81, 190.04, -1),
])
def test_computed_coefficients(set_id, a_coeff, k_coeff, sign):
    coeffs = directivity_coefficients(get_parameter_set(set_id, exact_eq13=True))
    assert coeffs.a_coeff == pytest.approx(a_coeff, rel=1e-3)
    assert coeffs.k_coeff == pytest.approx(k_coeff, rel=1e-3)
    assert coeffs.sign == sign


@pytest.mark.parametrize('set_id', [1, 2, 3])
def test_computed_coefficients_agree_with_table(set_id):
    a_coeff, k_coeff, sign = TABULATED_COEFFICIENTS[set_id]
    coeffs = directivity_coefficients(get_parameter_set(set_id))
    assert coeffs.a_coeff == pytest.approx(a_coeff, rel=5e-3)
    assert coeffs.k_coeff == pytest.approx(k_coeff, rel=5e-3)
    assert coeffs.sign == sign


def test_override_replaces_coefficients(set4):
    coeffs = directivity_coefficients(set4)
    assert (coeffs.a_coeff, coeffs.k_coeff, coeffs.sign) == (45.9, 190.0, -1)
    assert coeffs.domain_max_deg == pytest.approx(math.sqrt(190.0))
    assert coeffs.formula() == '45.9*pi*sqrt(190 - dphi^2)/dphi'


def test_domains():
    assert directivity_domain(get_parameter_set(1)) == (0.0, math.inf)
    assert directivity_domain(get_parameter_set(3))[1] == pytest.approx(15.138, abs=1e-3)


def test_degenerate_set():
    degenerate = UpaParameterSet(id='custom', delta_phi_y_deg=15.0, delta_theta_deg=30.0, theta0_deg=60.0)
    with pytest.raises(DomainError):
        directivity_coefficients(degenerate)


@pytest.mark.parametrize('set_id, dphi, expected', [(1, 10.0, 85.36), (3, 10.0, 81.86)])
def test_directivity_values(set_id, dphi, expected):
    assert directivity_at(get_parameter_set(set_id), dphi) == pytest.approx(expected, rel=1e-3)


def test_directivity_set4_override(set4):
    assert directivity_at(set4, 3.5) == pytest.approx(45.9 * math.pi * math.sqrt(190.0 - 12.25) / 3.5)


@pytest.mark.parametrize('set_id', [1, 2, 3, 4])
def test_factored_form_matches_direct_evaluation(set_id):
    parameter_set = get_parameter_set(set_id, exact_eq13=True)
    upper = min(directivity_domain(parameter_set)[1] - 0.5, 60.0)
    for dphi in np.linspace(0.1, upper, 97):
        assert directivity_at(parameter_set, float(dphi)) == pytest.approx(
            directivity_eq13(parameter_set, float(dphi)), rel=1e-12)


@pytest.mark.parametrize('set_id', [1, 2, 3, 4])
def test_directivity_decreases_with_beamwidth(set_id):
    parameter_set = get_parameter_set(set_id)
    upper = min(directivity_domain(parameter_set)[1], 60.0)
    values = [directivity_at(parameter_set, float(d)) for d in np.linspace(0.2, upper, 200)]
    assert all(b < a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize('exact', [False, True], ids=['tabulated', 'exact'])
@pytest.mark.parametrize('set_id', [1, 2, 3, 4])
def test_directivity_grows_without_bound_for_narrow_beams(set_id, exact):
    assert directivity_at(get_parameter_set(set_id, exact_eq13=exact), 1e-3) > 1e5


def test_directivity_outside_domain(set4):
    with pytest.raises(DomainError, match='outside the directivity domain'):
        directivity_at(set4, 14.0)
    with pytest.raises(DomainError):
        directivity_at(set4, 0.0)


def test_directivity_at_domain_edge_is_zero(set4):
    assert directivity_at(set4, math.sqrt(190.0)) == pytest.approx(0.0, abs=1e-6)


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

@pytest.mark.parametrize('set_id, failures', [(1, []), (2, []), (3, ['C2']), (4, ['C2', 'C3'])])
def test_constraints_per_set(set_id, failures):
    assert check_constraints(get_parameter_set(set_id)).failures() == failures


def test_constraint_report_fields():
    report = check_constraints(get_parameter_set(3))
    assert report.c3_sum_deg == pytest.approx(90.0)
    assert report.c2_value < 0
    assert not report.all_pass


def test_constraint1_limit():
    wide = UpaParameterSet(id='custom', delta_phi_y_deg=15.0, delta_theta_deg=30.0, theta0_deg=75.0)
    assert check_constraints(wide).failures() == ['C1']


# ---------------------------------------------------------------------------
# Element design
# ---------------------------------------------------------------------------

def test_elements_for_set4_at_3_5_deg(set4):
    design = elements_for_beamwidth(set4, 3.5)
    assert design.delta_phi_x_deg == pytest.approx(3.6186, abs=1e-4)
    assert (design.m_elements, design.n_elements, design.total_elements) == (29, 10, 290)
    assert design.in_large_array_regime


def test_elements_record_phi0(set4):
    design = elements_for_beamwidth(set4, 10.15, phi0_deg=0.0)
    assert design.phi0_deg == 0.0
    assert design.delta_phi_x_deg == pytest.approx(15.0, abs=0.05)
    assert design.m_elements == 7


def test_small_design_logs_warning(set4, caplog):
    with caplog.at_level(logging.WARNING, logger='BeamPlan.antenna'):
        design = elements_for_beamwidth(set4, 12.0)
    assert design.m_elements == 5
    assert not design.in_large_array_regime
    assert 'below the large-array regime' in caplog.text


@pytest.mark.parametrize('set_id', [1, 2, 3, 4])
def test_elements_never_grow_with_beamwidth(set_id):
    parameter_set = get_parameter_set(set_id)
    upper = min(directivity_domain(parameter_set)[1] - 0.01, 360.0)
    counts = [elements_for_beamwidth(parameter_set, float(d)).m_elements for d in np.linspace(0.5, upper, 2000)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
    assert counts[0] > counts[-1]
