"""
Received power vs beamwidth for BeamPlan

Beam windows, extracted power (closed form and quadrature), UPA and ULA
received power, their small-beamwidth maxima and the eta-percentile
beamwidth. Percentiles are solved on the reduced form

    dphi / (erf(arg) * sqrt(K + sign * dphi^2)) = RHS / eta

which is monotone over the directivity domain whenever the small-beamwidth
limit is the supremum of received power (require_limit_is_maximum), so a
grid scan followed by Brent's method finds the unique root.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from BeamPlan.antenna import (
    directivity_coefficients,
    directivity_from_coefficients,
    element_count,
    elements_for_beamwidth,
    ula_directivity_from_beamwidth,
)
from BeamPlan.channel import fit_cluster, fitted_power, gaussian_pas_density
from BeamPlan.exceptions import ConfigError, DomainError, LimitNotMaximumError, NoSolutionError
from BeamPlan.models import (
    ULA_BEAMWIDTH_CONSTANT,
    BeamPattern,
    Channel,
    ClusterProfile,
    ComparisonRow,
    ComparisonSummary,
    GaussianFit,
    GaussianPas,
    PercentileSolution,
    SweepRow,
    UpaParameterSet,
    WindowKind,
)
from BeamPlan.numerics import erf, find_root, integrate

logger = logging.getLogger(__name__)

_SQRT_2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Lower end of every beamwidth bracket and the gap kept from a finite domain edge
BRACKET_EPS_DEG = 1e-6
# Azimuth beams wider than a full turn are meaningless
MAX_BEAMWIDTH_DEG = 360.0
_SCAN_POINTS = 512
# Designs above this many elements are reported as impractical
IMPRACTICAL_ELEMENTS = 10_000


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------

def mw_to_dbm(power_mw: float) -> float:
    if power_mw < 0 or math.isnan(power_mw):
        raise DomainError(f'power must be >= 0 mW, got {power_mw}')
    if power_mw == 0:
        return -math.inf
    return 10.0 * math.log10(power_mw)


def dbm_to_mw(power_dbm: float) -> float:
    if math.isnan(power_dbm):
        raise DomainError('power in dBm is NaN')
    if power_dbm == -math.inf:
        return 0.0
    return 10.0 ** (power_dbm / 10.0)


# Roundoff allowed when a received power is compared with its maximum
_LIMIT_SLACK = 1e-9


def percent_of_max(received_mw: float, maximum_mw: float) -> float:
    if not maximum_mw > 0:
        raise DomainError(f'maximum power must be > 0, got {maximum_mw}')
    if not received_mw >= 0:
        raise DomainError(f'received power must be >= 0 mW, got {received_mw}')
    ratio = received_mw / maximum_mw
    if ratio > 1.0 + _LIMIT_SLACK:
        raise DomainError(f'received power {received_mw:.6g} mW exceeds the maximum {maximum_mw:.6g} mW')
    return 100.0 * min(ratio, 1.0)


# ---------------------------------------------------------------------------
# Beam windows and extracted power
# ---------------------------------------------------------------------------

def beam_weight(pattern: BeamPattern, phi_deg: float) -> float:
    lo, hi = pattern.support
    if phi_deg < lo or phi_deg > hi:
        return 0.0
    if pattern.kind is WindowKind.RECTANGULAR:
        return 1.0
    return 1.0 - abs(phi_deg - pattern.steer_deg) / pattern.width_deg


def incident_to_total_power(p_inc_mw_per_m2: float, wavelength_m: float) -> float:
    """Power available to an isotropic aperture: P_inc * lambda^2 / (4 pi)"""
    if not (p_inc_mw_per_m2 > 0 and wavelength_m > 0):
        raise DomainError('incident power density and wavelength must be > 0')
    return p_inc_mw_per_m2 * wavelength_m ** 2 / (4.0 * math.pi)


def _check_beamwidth(delta_phi_deg: float) -> None:
    if math.isnan(delta_phi_deg) or delta_phi_deg < 0:
        raise DomainError(f'beamwidth must be >= 0, got {delta_phi_deg}')


def extracted_power_gaussian(pas: GaussianPas, delta_phi_deg: float) -> float:
    """Power inside a rectangular beam steered at the cluster AoA"""
    _check_beamwidth(delta_phi_deg)
    if math.isinf(delta_phi_deg):
        return pas.total_power_mw
    return pas.total_power_mw * erf(delta_phi_deg / (2.0 * _SQRT_2 * pas.sigma_deg))


def extracted_power_fit(fit: GaussianFit, delta_phi_deg: float) -> float:
    _check_beamwidth(delta_phi_deg)
    if math.isinf(delta_phi_deg):
        return fitted_power(fit)
    return fitted_power(fit) * erf(delta_phi_deg / (2.0 * fit.v_deg))


def extracted_power_numeric(pattern: BeamPattern, density: Callable[[float], float],
                            tol: float = 1e-12) -> float:
    """Quadrature of window x density over the window support

    The integrand is scaled by the density at the window edges and center
    so the tolerance is relative to the profile, not to its absolute level.
    """
    lo, hi = pattern.support
    scale = max(abs(density(lo)), abs(density(pattern.steer_deg)), abs(density(hi)))
    if scale == 0 or not math.isfinite(scale):
        scale = 1.0

    def integrand(phi: float) -> float:
        return beam_weight(pattern, phi) * density(phi) / scale

    return integrate(integrand, lo, hi, tol=tol) * scale


def channel_density(channel: Channel) -> Callable[[float], float]:
    if isinstance(channel, GaussianPas):
        return lambda phi: gaussian_pas_density(channel, phi)
    return channel.density


def channel_center(channel: Channel) -> float:
    return channel.cluster_aoa_deg if isinstance(channel, GaussianPas) else channel.x_deg


def resolve_channel(channel: Union[Channel, ClusterProfile], bin_width_deg: float = 1.0) -> Channel:
    """Ray clusters are summarized by their Gaussian fit; analytic channels pass through"""
    if isinstance(channel, ClusterProfile):
        return fit_cluster(channel, bin_width_deg)
    if isinstance(channel, (GaussianPas, GaussianFit)):
        return channel
    raise ConfigError(f'unsupported channel type {type(channel).__name__}')


def extracted_power(channel: Channel, delta_phi_deg: float) -> float:
    if isinstance(channel, GaussianPas):
        return extracted_power_gaussian(channel, delta_phi_deg)
    return extracted_power_fit(channel, delta_phi_deg)


# ---------------------------------------------------------------------------
# UPA received power
# ---------------------------------------------------------------------------

def received_power(parameter_set: UpaParameterSet, channel: Channel, delta_phi_deg: float) -> float:
    """Directivity times extracted power for a perfectly aligned beam (mW)"""
    directivity = directivity_from_coefficients(directivity_coefficients(parameter_set), delta_phi_deg)
    return directivity * extracted_power(channel, delta_phi_deg)


def max_received_power(parameter_set: UpaParameterSet, channel: Channel) -> float:
    """Limit of received_power as the beamwidth goes to zero

    This is the supremum for sign = -1 sets. For sign = +1 sets check
    peak_above_limit before treating it as the maximum.
    """
    coeffs = directivity_coefficients(parameter_set)
    if isinstance(channel, GaussianPas):
        return coeffs.a_coeff * math.sqrt(math.pi * coeffs.k_coeff / 2.0) * channel.total_power_mw / channel.sigma_deg
    return coeffs.a_coeff * math.pi * math.sqrt(coeffs.k_coeff) * channel.u


def _capture_scale(channel: Channel) -> Tuple[float, float]:
    """(width w, c) with erf argument dphi/w and dphi/erf(dphi/w) -> c as dphi -> 0"""
    if isinstance(channel, GaussianPas):
        width = 2.0 * _SQRT_2 * channel.sigma_deg
    else:
        width = 2.0 * channel.v_deg
    return width, width * _SQRT_PI / 2.0


def _check_eta(eta: float) -> None:
    if not 0 < eta < 1:
        raise DomainError(f'eta must be in (0, 1), got {eta}')


def _scan_top(parameter_set: UpaParameterSet) -> float:
    return min(directivity_coefficients(parameter_set).domain_max_deg - BRACKET_EPS_DEG, MAX_BEAMWIDTH_DEG)


def percentile_lhs(parameter_set: UpaParameterSet, channel: Channel) -> Callable[[float], float]:
    """dphi -> dphi / (erf(dphi / w) * sqrt(K + sign * dphi^2)), the reduced percentile form"""
    coeffs = directivity_coefficients(parameter_set)
    width, _ = _capture_scale(channel)

    def lhs(dphi: float) -> float:
        return dphi / (erf(dphi / width) * math.sqrt(coeffs.k_coeff + coeffs.sign * dphi * dphi))

    return lhs


def peak_above_limit(parameter_set: UpaParameterSet, channel: Channel) -> Optional[Tuple[float, float]]:
    """(dphi, mW) of the strongest scanned point when it beats the small-beamwidth limit, else None

    With sign = -1 both factors of D * P_ext / P_max shrink, so the limit is
    the supremum. With sign = +1 the ratio grows away from zero when
    3 w^2 > 2 K and tends to w * sqrt(pi) / (2 sqrt(K)) for wide beams, so
    the domain is scanned.
    """
    coeffs = directivity_coefficients(parameter_set)
    if coeffs.sign < 0:
        return None
    limit = max_received_power(parameter_set, channel)
    grid = np.linspace(BRACKET_EPS_DEG, _scan_top(parameter_set), _SCAN_POINTS)
    powers = np.array([received_power(parameter_set, channel, float(d)) for d in grid])
    index = int(np.argmax(powers))
    width, _ = _capture_scale(channel)
    rises_from_zero = 3.0 * width * width > 2.0 * coeffs.k_coeff
    if rises_from_zero or powers[index] > limit * (1.0 + _LIMIT_SLACK):
        return float(grid[index]), float(powers[index])
    return None


def require_limit_is_maximum(parameter_set: UpaParameterSet, channel: Channel) -> float:
    """max_received_power, or LimitNotMaximumError when a finite beamwidth receives more"""
    limit = max_received_power(parameter_set, channel)
    peak = peak_above_limit(parameter_set, channel)
    if peak is not None:
        dphi, power = peak
        raise LimitNotMaximumError(
            f'set {parameter_set.id}: received power reaches {power:.4g} mW at {dphi:.3g} deg, above its '
            f'small-beamwidth limit {limit:.4g} mW; fractions of the maximum are undefined for this channel',
            peak_deg=dphi, peak_mw=power)
    return limit


def _solve_upa_beamwidth(parameter_set: UpaParameterSet, channel: Channel, eta: float) -> float:
    require_limit_is_maximum(parameter_set, channel)
    coeffs = directivity_coefficients(parameter_set)
    _, capture_limit = _capture_scale(channel)
    sqrt_k = math.sqrt(coeffs.k_coeff)
    target = capture_limit / (sqrt_k * eta)
    lhs = percentile_lhs(parameter_set, channel)

    lo = BRACKET_EPS_DEG
    hi = _scan_top(parameter_set)
    grid = np.linspace(lo, hi, _SCAN_POINTS)
    values = np.array([lhs(float(d)) for d in grid])
    above = np.nonzero(values >= target)[0]
    if above.size == 0:
        floor = (capture_limit / sqrt_k) / float(values.max())
        raise NoSolutionError(
            f'eta={eta:g} is unreachable for set {parameter_set.id}: received power stays above '
            f'{floor:.4f} of its maximum for beamwidths up to {hi:g} deg', floor=floor)
    index = int(above[0])
    if index == 0:
        return lo
    bracket = (float(grid[index - 1]), float(grid[index]))
    logger.debug('Percentile eta=%g bracket [%.6g, %.6g]', eta, *bracket)
    return find_root(lambda d: lhs(d) - target, bracket)


def percentile_beamwidth(parameter_set: UpaParameterSet, channel: Channel, eta: float,
                         phi0_deg: float = 90.0) -> PercentileSolution:
    """Widest beamwidth whose received power is eta times the maximum"""
    _check_eta(eta)
    beamwidth = _solve_upa_beamwidth(parameter_set, channel, eta)
    maximum = max_received_power(parameter_set, channel)
    solution = PercentileSolution(
        eta=eta,
        beamwidth_deg=beamwidth,
        received_power_mw=received_power(parameter_set, channel, beamwidth),
        max_power_mw=maximum,
        design=elements_for_beamwidth(parameter_set, beamwidth, phi0_deg),
    )
    logger.info('UPA eta=%g: dphi=%.4f deg, %d elements', eta, beamwidth, solution.elements)
    return solution


def beamwidth_grid(lo: float, hi: float, step: float) -> List[float]:
    """Inclusive grid lo, lo+step, ..., hi (hi is snapped when it is a whole number of steps)"""
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise ConfigError('beamwidth range must be finite')
    if step <= 0:
        raise ConfigError(f'range step must be > 0, got {step}')
    if lo <= 0 or hi < lo:
        raise ConfigError(f'range must satisfy 0 < lo <= hi, got {lo}:{hi}')
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 10) for k in range(count)]


def percentile_scan(parameter_set: UpaParameterSet, channel: Channel, eta: float,
                    grid: Sequence[float]) -> float:
    """Grid search for the eta crossing of received power / maximum

    Returns the crossing linearly interpolated between the bracketing grid
    points.
    """
    _check_eta(eta)
    maximum = require_limit_is_maximum(parameter_set, channel)
    previous: Optional[Tuple[float, float]] = None
    for dphi in sorted(grid):
        ratio = received_power(parameter_set, channel, dphi) / maximum
        if ratio <= eta:
            if previous is None:
                return float(dphi)
            d0, r0 = previous
            return float(d0 + (r0 - eta) / (r0 - ratio) * (dphi - d0))
        previous = (dphi, ratio)
    raise NoSolutionError(f'eta={eta:g} is not crossed on the scanned grid')


# ---------------------------------------------------------------------------
# ULA
# ---------------------------------------------------------------------------

def ula_received_power(channel: Channel, delta_phi_deg: float) -> float:
    return ula_directivity_from_beamwidth(delta_phi_deg) * extracted_power(channel, delta_phi_deg)


def ula_max_power(channel: Channel) -> float:
    if isinstance(channel, GaussianPas):
        return ULA_BEAMWIDTH_CONSTANT * channel.total_power_mw / (_SQRT_2PI * channel.sigma_deg)
    return ULA_BEAMWIDTH_CONSTANT * channel.u


def ula_percentile_beamwidth(channel: Channel, eta: float) -> PercentileSolution:
    _check_eta(eta)
    width, capture_limit = _capture_scale(channel)
    target = capture_limit / eta

    def excess(dphi: float) -> float:
        return dphi / erf(dphi / width) - target

    # dphi/erf >= dphi, so target + 1 already overshoots
    beamwidth = find_root(excess, (BRACKET_EPS_DEG, target + 1.0))
    elements = element_count(beamwidth)
    logger.info('ULA eta=%g: dphi=%.4f deg, %d elements', eta, beamwidth, elements)
    return PercentileSolution(
        eta=eta,
        beamwidth_deg=beamwidth,
        received_power_mw=ula_received_power(channel, beamwidth),
        max_power_mw=ula_max_power(channel),
        architecture='ULA',
        ula_elements=elements,
    )


# ---------------------------------------------------------------------------
# Comparison and tables
# ---------------------------------------------------------------------------

def _ratio_db(numerator_mw: float, denominator_mw: float) -> float:
    return 10.0 * math.log10(numerator_mw / denominator_mw)


def compare_ula_upa(parameter_set: UpaParameterSet, channel: Channel, etas: Sequence[float],
                    phi0_deg: float = 90.0) -> List[ComparisonRow]:
    ula_max = ula_max_power(channel)
    rows: List[ComparisonRow] = []
    for eta in etas:
        for solution in (percentile_beamwidth(parameter_set, channel, eta, phi0_deg),
                         ula_percentile_beamwidth(channel, eta)):
            rows.append(ComparisonRow(
                architecture=solution.architecture,
                eta=eta,
                beamwidth_deg=solution.beamwidth_deg,
                elements=solution.elements,
                power_mw=solution.received_power_mw,
                power_dbm=mw_to_dbm(solution.received_power_mw),
                delta_db_vs_ula_max=_ratio_db(solution.received_power_mw, ula_max),
            ))
    return rows


def comparison_summary(parameter_set: UpaParameterSet, channel: Channel,
                       phi0_deg: float = 90.0) -> ComparisonSummary:
    upa_max = max_received_power(parameter_set, channel)
    ula_max = ula_max_power(channel)
    upa_50 = percentile_beamwidth(parameter_set, channel, 0.5, phi0_deg)
    upa_95 = percentile_beamwidth(parameter_set, channel, 0.95, phi0_deg)
    ula_95 = ula_percentile_beamwidth(channel, 0.95)
    note = None
    if 49 <= upa_50.elements <= 100:
        note = (f'the 50% UPA design ({upa_50.design.m_elements}x{upa_50.design.n_elements}, '
                f'{upa_50.elements} elements) is comparable to a practical 8x8 array')
    return ComparisonSummary(
        upa_max_mw=upa_max,
        ula_max_mw=ula_max,
        max_gap_db=_ratio_db(upa_max, ula_max),
        upa_50=upa_50,
        upa_95=upa_95,
        ula_95=ula_95,
        upa_50_vs_ula_95_db=_ratio_db(upa_50.received_power_mw, ula_95.received_power_mw),
        note=note,
    )


def _sweep_row(parameter_set: UpaParameterSet, channel: Channel, maximum: float, dphi: float) -> SweepRow:
    directivity = directivity_from_coefficients(directivity_coefficients(parameter_set), dphi)
    captured = extracted_power(channel, dphi)
    power = directivity * captured
    return SweepRow(
        delta_phi_deg=dphi,
        directivity=directivity,
        extracted_power_mw=captured,
        received_power_mw=power,
        received_power_dbm=mw_to_dbm(power),
        percent_of_max=percent_of_max(power, maximum),
    )


def sweep(parameter_set: UpaParameterSet, channel: Channel, grid: Sequence[float],
          workers: int = 1) -> List[SweepRow]:
    """Received power over a beamwidth grid; rows keep grid order for any worker count"""
    coeffs = directivity_coefficients(parameter_set)
    outside = [d for d in grid if not 0 < d <= coeffs.domain_max_deg]
    if outside:
        reason = ' (Constraint 2 violated)' if coeffs.sign < 0 else ''
        raise DomainError(
            f'sweep range reaches {outside[0]:g} deg, outside the directivity domain '
            f'(0, {coeffs.domain_max_deg:.4f}] deg of set {parameter_set.id}{reason}')
    maximum = require_limit_is_maximum(parameter_set, channel)

    def row(dphi: float) -> SweepRow:
        return _sweep_row(parameter_set, channel, maximum, dphi)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(row, grid))
    return [row(d) for d in grid]


def received_power_vs_elements(parameter_set: UpaParameterSet, channel: Channel, grid: Sequence[float],
                               phi0_deg: float = 90.0) -> List[Tuple[str, float, int, float, float]]:
    """(architecture, dphi, elements, power mW, power dBm) rows for UPA then ULA"""
    coeffs = directivity_coefficients(parameter_set)
    rows = []
    for dphi in grid:
        if not 0 < dphi < coeffs.domain_max_deg:
            logger.debug('Skipping UPA point %.4g deg outside the directivity domain', dphi)
            continue
        design = elements_for_beamwidth(parameter_set, dphi, phi0_deg)
        power = received_power(parameter_set, channel, dphi)
        rows.append(('UPA', dphi, design.total_elements, power, mw_to_dbm(power)))
    for dphi in grid:
        power = ula_received_power(channel, dphi)
        rows.append(('ULA', dphi, element_count(dphi), power, mw_to_dbm(power)))
    return rows
