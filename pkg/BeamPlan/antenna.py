"""
Rectangular UPA and ULA directivity / beamwidth algebra

Angles are degrees throughout; the 101.5 deg-element rule and the K
coefficient (deg^2) are degree based, so radians appear only inside
cos/sin. Gain and directivity are used interchangeably (lossless array).
"""

import logging
import math
import warnings
from typing import Tuple

from BeamPlan.exceptions import DomainError, SmallArrayWarning
from BeamPlan.models import (
    LARGE_ARRAY_MIN_ELEMENTS,
    ULA_BEAMWIDTH_CONSTANT,
    ConstraintReport,
    DirectivityCoefficients,
    UpaDesign,
    UpaParameterSet,
)

logger = logging.getLogger(__name__)

# Constraint 3 reads "theta0 + dtheta/2 ~ 90 deg"; this is the accepted deviation
CONSTRAINT3_TOLERANCE_DEG = 2.0
# Element counts are ceilings; quotients within this of an integer count as that integer
_CEIL_SLACK = 1e-9


def _cos_deg(angle_deg: float) -> float:
    return math.cos(math.radians(angle_deg))


def _sin_deg(angle_deg: float) -> float:
    return math.sin(math.radians(angle_deg))


def _check_theta0(theta0_deg: float) -> None:
    if not 0 <= theta0_deg < 90:
        raise DomainError(f'elevation scan angle theta0 must be in [0, 90) deg, got {theta0_deg}')


def element_count(beamwidth_deg: float) -> int:
    """Smallest element count whose ULA beamwidth 101.5/n does not exceed beamwidth_deg"""
    if not beamwidth_deg > 0:
        raise DomainError(f'beamwidth must be > 0, got {beamwidth_deg}')
    return max(1, math.ceil(ULA_BEAMWIDTH_CONSTANT / beamwidth_deg - _CEIL_SLACK))


# ---------------------------------------------------------------------------
# ULA
# ---------------------------------------------------------------------------

def ula_beamwidth_deg(elements: int) -> float:
    if elements < 1:
        raise DomainError(f'a ULA needs at least one element, got {elements}')
    return ULA_BEAMWIDTH_CONSTANT / elements


def ula_directivity(elements: int) -> float:
    """Broadside directivity of a uniformly excited ULA equals its element count"""
    if elements < 1:
        raise DomainError(f'a ULA needs at least one element, got {elements}')
    return float(elements)


def ula_directivity_from_beamwidth(delta_phi_deg: float) -> float:
    if not delta_phi_deg > 0:
        raise DomainError(f'beamwidth must be > 0, got {delta_phi_deg}')
    return ULA_BEAMWIDTH_CONSTANT / delta_phi_deg


# ---------------------------------------------------------------------------
# UPA
# ---------------------------------------------------------------------------

def upa_directivity_broadside(m: int, n: int, theta0_deg: float) -> float:
    """D = pi * cos(theta0) * N * M (large-array approximation)"""
    _check_theta0(theta0_deg)
    if m < 1 or n < 1:
        raise DomainError(f'element counts must be >= 1, got M={m}, N={n}')
    if min(m, n) < LARGE_ARRAY_MIN_ELEMENTS:
        message = (f'{m}x{n} array is below the large-array regime '
                   f'(M, N >= {LARGE_ARRAY_MIN_ELEMENTS}); directivity is approximate')
        logger.warning(message)
        warnings.warn(message, SmallArrayWarning, stacklevel=2)
    return math.pi * _cos_deg(theta0_deg) * n * m


def upa_directivity_from_beamwidths(delta_phi_x_deg: float, delta_phi_y_deg: float,
                                    theta0_deg: float) -> float:
    _check_theta0(theta0_deg)
    return math.pi * _cos_deg(theta0_deg) * ULA_BEAMWIDTH_CONSTANT ** 2 / (delta_phi_x_deg * delta_phi_y_deg)


def upa_beamwidths(delta_phi_x_deg: float, delta_phi_y_deg: float, theta0_deg: float,
                   phi0_deg: float) -> Tuple[float, float]:
    """Elevation and azimuth beamwidths (delta_theta, delta_phi) of a large rectangular UPA"""
    if not (delta_phi_x_deg > 0 and delta_phi_y_deg > 0):
        raise DomainError('axis beamwidths must be > 0')
    _check_theta0(theta0_deg)
    inv_x = delta_phi_x_deg ** -2
    inv_y = delta_phi_y_deg ** -2
    cos2_phi = _cos_deg(phi0_deg) ** 2
    sin2_phi = _sin_deg(phi0_deg) ** 2
    cos2_theta = _cos_deg(theta0_deg) ** 2
    delta_theta = 1.0 / math.sqrt(cos2_theta * (inv_x * cos2_phi + inv_y * sin2_phi))
    delta_phi = 1.0 / math.sqrt(inv_x * sin2_phi + inv_y * cos2_phi)
    return delta_theta, delta_phi


def _eq12_radicand(delta_theta_deg: float, theta0_deg: float, delta_phi_y_deg: float,
                   delta_phi_deg: float) -> float:
    t2 = (delta_theta_deg * _cos_deg(theta0_deg)) ** 2
    y2 = delta_phi_y_deg ** 2
    return delta_phi_deg ** 2 * (y2 - t2) + t2 * y2


def solve_delta_phi_x(delta_theta_deg: float, theta0_deg: float, delta_phi_y_deg: float,
                      delta_phi_deg: float) -> float:
    """x-axis ULA beamwidth realizing azimuth beamwidth delta_phi for fixed (dtheta, theta0, dphi_y)"""
    _check_theta0(theta0_deg)
    if not (delta_theta_deg > 0 and delta_phi_y_deg > 0 and delta_phi_deg > 0):
        raise DomainError('beamwidths must be > 0')
    radicand = _eq12_radicand(delta_theta_deg, theta0_deg, delta_phi_y_deg, delta_phi_deg)
    if radicand <= 0:
        raise DomainError(
            f'no real x-axis beamwidth for delta_phi={delta_phi_deg:g} deg: '
            f'Constraint 2 (dphi_y^2 - dtheta^2 cos^2 theta0 >= 0) is violated and '
            f'delta_phi lies outside the supported range')
    numerator = delta_theta_deg * _cos_deg(theta0_deg) * delta_phi_y_deg * delta_phi_deg
    return numerator / math.sqrt(radicand)


def directivity_coefficients(parameter_set: UpaParameterSet) -> DirectivityCoefficients:
    """Factor the closed-form directivity into A * pi * sqrt(K + sign * dphi^2) / dphi"""
    t2 = (parameter_set.delta_theta_deg * _cos_deg(parameter_set.theta0_deg)) ** 2
    y2 = parameter_set.delta_phi_y_deg ** 2
    gap = y2 - t2
    if abs(gap) <= 1e-12 * max(y2, t2):
        raise DomainError(
            f'set {parameter_set.id}: dphi_y^2 equals dtheta^2 cos^2 theta0, '
            'so D is proportional to 1/dphi and has no (A, K) form')
    a_coeff = ULA_BEAMWIDTH_CONSTANT ** 2 * math.sqrt(abs(gap)) / (parameter_set.delta_theta_deg * y2)
    k_coeff = t2 * y2 / abs(gap)
    sign = 1 if gap > 0 else -1
    if parameter_set.prefactor_override is not None:
        a_coeff = parameter_set.prefactor_override
    if parameter_set.k_override is not None:
        k_coeff = parameter_set.k_override
    domain_max = math.sqrt(k_coeff) if sign < 0 else math.inf
    return DirectivityCoefficients(a_coeff=a_coeff, k_coeff=k_coeff, sign=sign, domain_max_deg=domain_max)


def directivity_domain(parameter_set: UpaParameterSet) -> Tuple[float, float]:
    return 0.0, directivity_coefficients(parameter_set).domain_max_deg


def directivity_from_coefficients(coeffs: DirectivityCoefficients, delta_phi_deg: float) -> float:
    if not delta_phi_deg > 0:
        raise DomainError(f'azimuth beamwidth must be > 0, got {delta_phi_deg}')
    if delta_phi_deg > coeffs.domain_max_deg:
        raise DomainError(
            f'azimuth beamwidth {delta_phi_deg:g} deg is outside the directivity domain '
            f'(0, {coeffs.domain_max_deg:.4f}] deg')
    radicand = max(0.0, coeffs.k_coeff + coeffs.sign * delta_phi_deg ** 2)
    return coeffs.a_coeff * math.pi * math.sqrt(radicand) / delta_phi_deg


def directivity_at(parameter_set: UpaParameterSet, delta_phi_deg: float) -> float:
    """UPA directivity as a function of the azimuth beamwidth"""
    return directivity_from_coefficients(directivity_coefficients(parameter_set), delta_phi_deg)


def directivity_eq13(parameter_set: UpaParameterSet, delta_phi_deg: float) -> float:
    """Unfactored closed-form directivity; ignores any coefficient override"""
    if not delta_phi_deg > 0:
        raise DomainError(f'azimuth beamwidth must be > 0, got {delta_phi_deg}')
    radicand = _eq12_radicand(parameter_set.delta_theta_deg, parameter_set.theta0_deg,
                              parameter_set.delta_phi_y_deg, delta_phi_deg)
    if radicand < 0:
        raise DomainError(f'azimuth beamwidth {delta_phi_deg:g} deg is outside the directivity domain')
    return (ULA_BEAMWIDTH_CONSTANT ** 2 * math.pi * math.sqrt(radicand)
            / (parameter_set.delta_theta_deg * delta_phi_deg * parameter_set.delta_phi_y_deg ** 2))


def check_constraints(parameter_set: UpaParameterSet) -> ConstraintReport:
    t2 = (parameter_set.delta_theta_deg * _cos_deg(parameter_set.theta0_deg)) ** 2
    c2_value = parameter_set.delta_phi_y_deg ** 2 - t2
    c3_sum = parameter_set.theta0_deg + parameter_set.delta_theta_deg / 2.0
    c1_limit = ULA_BEAMWIDTH_CONSTANT / LARGE_ARRAY_MIN_ELEMENTS
    return ConstraintReport(
        c1_pass=parameter_set.delta_phi_y_deg <= c1_limit + 1e-12,
        c2_pass=c2_value >= 0,
        c3_pass=abs(c3_sum - 90.0) <= CONSTRAINT3_TOLERANCE_DEG,
        c3_sum_deg=c3_sum,
        c2_value=c2_value,
        delta_phi_y_deg=parameter_set.delta_phi_y_deg,
    )


def elements_for_beamwidth(parameter_set: UpaParameterSet, delta_phi_deg: float,
                           phi0_deg: float = 90.0) -> UpaDesign:
    """Element counts (M along x, N along y) for an azimuth beamwidth

    The x-axis beamwidth comes from the steered-beam relation with the set's fixed
    (dtheta, theta0, dphi_y); phi0 is carried on the design.
    """
    delta_phi_x = solve_delta_phi_x(parameter_set.delta_theta_deg, parameter_set.theta0_deg,
                                    parameter_set.delta_phi_y_deg, delta_phi_deg)
    design = UpaDesign(
        m_elements=element_count(delta_phi_x),
        n_elements=element_count(parameter_set.delta_phi_y_deg),
        theta0_deg=parameter_set.theta0_deg,
        phi0_deg=phi0_deg,
        delta_phi_x_deg=delta_phi_x,
        delta_phi_y_deg=parameter_set.delta_phi_y_deg,
    )
    if not design.in_large_array_regime:
        logger.warning('Design %dx%d for dphi=%.3g deg is below the large-array regime',
                       design.m_elements, design.n_elements, delta_phi_deg)
    return design
