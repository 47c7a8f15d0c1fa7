"""
Intra-cluster channel models for BeamPlan

Two azimuth power-angle descriptions of a cluster:
- the IEEE 802.11ad Gaussian PAS (sigma, cluster AoA, total power)
- ray-traced clusters (specular + diffuse rays), which are binned
  into a power angle profile and summarized by a Gaussian fit

Phases and delays are carried on the rays but power math ignores them.
"""

import logging
import math
from dataclasses import replace
from typing import Optional

import numpy as np

from BeamPlan.exceptions import ConfigError, DegenerateInputError
from BeamPlan.models import (
    ClusterProfile,
    Envelope,
    GaussianFit,
    GaussianPas,
    PasSamples,
    Ray,
    SynthesisConfig,
)
from BeamPlan.numerics import fit_gaussian

logger = logging.getLogger(__name__)

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)

MIN_OCCUPIED_BINS = 5


def gaussian_pas_density(pas: GaussianPas, phi_deg: float) -> float:
    """PAS density in mW/deg at azimuth phi_deg"""
    z = (phi_deg - pas.cluster_aoa_deg) / pas.sigma_deg
    return pas.total_power_mw / (_SQRT_2PI * pas.sigma_deg) * math.exp(-0.5 * z * z)


def total_cluster_power(cluster: ClusterProfile) -> float:
    """Cluster power a_s^2 + (S/N_r) * sum(a_k^2)"""
    specular = cluster.specular_amplitude ** 2
    if cluster.n_rays == 0:
        return specular
    weight = cluster.sas_deg / cluster.n_rays
    return specular + weight * math.fsum(r.amplitude ** 2 for r in cluster.diffuse)


def ray_powers(cluster: ClusterProfile) -> np.ndarray:
    """Per-ray power a_k^2 * S/N_r, in diffuse order"""
    if cluster.n_rays == 0:
        return np.zeros(0)
    amps = np.array([r.amplitude for r in cluster.diffuse])
    return amps * amps * (cluster.sas_deg / cluster.n_rays)


def discretize_pas(cluster: ClusterProfile, bin_width_deg: float) -> PasSamples:
    """Bin ray powers into a uniform power angle profile (density = bin power / bin width)

    Bin centers run from the first ray offset minus one bin to the last
    ray offset plus one bin; the specular ray lands in the bin nearest its
    AoA.
    """
    if not (bin_width_deg > 0 and math.isfinite(bin_width_deg)):
        raise ConfigError(f'bin width must be > 0, got {bin_width_deg}')
    if cluster.is_empty:
        raise DegenerateInputError('cluster carries no power; nothing to discretize')

    offsets = np.array([r.offset_aoa_deg for r in cluster.diffuse] + [0.0])
    lo = float(offsets.min()) - bin_width_deg
    hi = float(offsets.max()) + bin_width_deg
    n_bins = int(math.ceil((hi - lo) / bin_width_deg - 1e-9)) + 1

    power = np.zeros(n_bins)
    idx = np.clip(np.rint((offsets - lo) / bin_width_deg).astype(int), 0, n_bins - 1)
    weights = np.append(ray_powers(cluster), cluster.specular_amplitude ** 2)
    np.add.at(power, idx, weights)

    origin = cluster.specular_aoa_deg + lo
    angles = tuple(float(origin + k * bin_width_deg) for k in range(n_bins))
    densities = tuple(float(p / bin_width_deg) for p in power)
    return PasSamples(angles_deg=angles, densities=densities, bin_width_deg=float(bin_width_deg))


def fit_cluster(cluster: ClusterProfile, bin_width_deg: float = 1.0) -> GaussianFit:
    samples = discretize_pas(cluster, bin_width_deg)
    occupied = samples.occupied_bins
    if occupied < MIN_OCCUPIED_BINS:
        raise DegenerateInputError(
            f'cluster occupies {occupied} bins of {bin_width_deg} deg; fitting needs at least {MIN_OCCUPIED_BINS}')
    fit = fit_gaussian(samples)
    logger.info('Fitted cluster: u=%.6g mW/deg, x=%.4f deg, v=%.4f deg', fit.u, fit.x_deg, fit.v_deg)
    return fit


def sigma_equivalent(fit: GaussianFit) -> float:
    """Standard deviation of the fitted density: v/sqrt(2)"""
    return fit.v_deg / math.sqrt(2.0)


def fitted_power(fit: GaussianFit) -> float:
    """Integral of the fitted density over all angles, u*v*sqrt(pi) (mW)"""
    return fit.u * fit.v_deg * _SQRT_PI


def gaussian_pas_from_fit(fit: GaussianFit) -> GaussianPas:
    """802.11ad-style description of a fitted profile (same shape, same power)"""
    return GaussianPas(sigma_deg=sigma_equivalent(fit), cluster_aoa_deg=fit.x_deg,
                       total_power_mw=fitted_power(fit))


# ---------------------------------------------------------------------------
# Synthetic clusters
# ---------------------------------------------------------------------------

def _envelope(kind: Envelope, offsets: np.ndarray, center: float, width: float) -> np.ndarray:
    if kind is Envelope.UNIFORM:
        return np.ones_like(offsets)
    if kind is Envelope.GAUSSIAN:
        return np.exp(-((offsets - center) / width) ** 2)
    return np.exp(-np.abs(offsets - center) / width)


def synthesize_cluster(config: Optional[SynthesisConfig] = None, **overrides) -> ClusterProfile:
    """Deterministic synthetic ray cluster, standing in for a ray tracer

    Diffuse offsets are spread uniformly over [-S/2, S/2]; amplitudes follow
    the envelope; phases, delays and optional log-normal amplitude jitter
    come from a generator seeded with config.seed.
    """
    config = config or SynthesisConfig()
    if overrides:
        config = replace(config, **overrides)

    try:
        kind = config.envelope if isinstance(config.envelope, Envelope) else Envelope(str(config.envelope).lower())
    except ValueError:
        names = ', '.join(e.value for e in Envelope)
        raise ConfigError(f'unknown envelope {config.envelope!r}; expected one of {names}')
    if isinstance(config.n_rays, bool) or int(config.n_rays) != config.n_rays or config.n_rays < 0:
        raise ConfigError(f'n_rays must be a non-negative integer, got {config.n_rays}')
    if not (config.sas_deg >= 0 and math.isfinite(config.sas_deg)):
        raise ConfigError(f'sas_deg must be >= 0, got {config.sas_deg}')
    if config.peak_amplitude < 0 or config.specular_amplitude < 0:
        raise ConfigError('amplitudes must be >= 0')
    if kind is not Envelope.UNIFORM and not config.envelope_width_deg > 0:
        raise ConfigError(f'{kind.value} envelope needs envelope_width_deg > 0')
    if config.mean_delay_s < 0 or config.amplitude_jitter < 0:
        raise ConfigError('mean_delay_s and amplitude_jitter must be >= 0')

    n = int(config.n_rays)
    if n == 1 and config.sas_deg > 0:
        raise ConfigError('a single diffuse ray cannot span a positive angle spread')

    rng = np.random.default_rng(config.seed)
    offsets = np.linspace(-config.sas_deg / 2.0, config.sas_deg / 2.0, n) if n > 1 else np.zeros(n)
    amplitudes = config.peak_amplitude * np.sqrt(
        _envelope(kind, offsets, config.envelope_center_deg, config.envelope_width_deg))
    phases = rng.uniform(0.0, 2.0 * math.pi, n)
    delays = rng.exponential(config.mean_delay_s, n) if config.mean_delay_s > 0 else np.zeros(n)
    if config.amplitude_jitter > 0:
        amplitudes = amplitudes * np.exp(rng.normal(0.0, config.amplitude_jitter, n))

    rays = tuple(
        Ray(amplitude=float(a), offset_aoa_deg=float(o), phase_rad=float(p), delay_s=float(d))
        for a, o, p, d in zip(amplitudes, offsets, phases, delays)
    )
    cluster = ClusterProfile(
        specular_amplitude=float(config.specular_amplitude),
        specular_aoa_deg=float(config.specular_aoa_deg),
        specular_phase_rad=float(config.specular_phase_rad),
        specular_toa_s=float(config.specular_toa_s),
        diffuse=rays,
    )
    logger.debug('Synthesized %d-ray %s cluster over %.3g deg (seed=%d)',
                 n, kind.value, cluster.sas_deg, config.seed)
    return cluster
