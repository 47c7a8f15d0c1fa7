"""
Domain types for BeamPlan

Angles are degrees, powers are mW and ray amplitudes are sqrt(mW) unless
a field name says otherwise. All types are immutable once built.
"""

import math
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from BeamPlan.exceptions import ConfigError

# Half-power beamwidth (deg) times element count for a uniformly excited lambda/2 ULA
ULA_BEAMWIDTH_CONSTANT = 101.5
# Smallest element count along an axis for which the large-array formulas hold
LARGE_ARRAY_MIN_ELEMENTS = 7


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ray:
    """One diffuse ray of a cluster; offset_aoa_deg is relative to the specular AoA"""

    amplitude: float
    offset_aoa_deg: float
    phase_rad: float = 0.0
    delay_s: float = 0.0

    def __post_init__(self):
        _require(_finite(self.amplitude, self.offset_aoa_deg, self.phase_rad, self.delay_s),
                 'ray fields must be finite')
        _require(self.amplitude >= 0, f'ray amplitude must be >= 0, got {self.amplitude}')
        _require(self.delay_s >= 0, f'ray delay must be >= 0, got {self.delay_s}')

    @property
    def power_mw(self) -> float:
        return self.amplitude ** 2


@dataclass(frozen=True)
class ClusterProfile:
    """Specular ray plus an ordered list of diffuse rays (first-order reflection cluster)"""

    specular_amplitude: float
    specular_aoa_deg: float
    diffuse: Tuple[Ray, ...] = ()
    specular_phase_rad: float = 0.0
    specular_toa_s: float = 0.0
    sas_deg: Optional[float] = None
    metadata: Dict[str, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        _require(_finite(self.specular_amplitude, self.specular_aoa_deg,
                         self.specular_phase_rad, self.specular_toa_s),
                 'specular ray fields must be finite')
        _require(self.specular_amplitude >= 0, 'specular amplitude must be >= 0')
        _require(self.specular_toa_s >= 0, 'specular time of arrival must be >= 0')
        object.__setattr__(self, 'specular_aoa_deg', self.specular_aoa_deg % 360.0)

        rays = tuple(sorted(self.diffuse, key=lambda r: r.offset_aoa_deg))
        object.__setattr__(self, 'diffuse', rays)

        spread = rays[-1].offset_aoa_deg - rays[0].offset_aoa_deg if len(rays) >= 2 else 0.0
        if self.sas_deg is None:
            object.__setattr__(self, 'sas_deg', spread)
        else:
            _require(abs(self.sas_deg - spread) <= 1e-9 * max(1.0, spread),
                     f'sas_deg={self.sas_deg} does not match the diffuse offset span {spread}')

    @property
    def n_rays(self) -> int:
        return len(self.diffuse)

    @property
    def is_empty(self) -> bool:
        return self.specular_amplitude == 0 and all(r.amplitude == 0 for r in self.diffuse)

    def absolute_aoa(self, ray: Ray) -> float:
        return self.specular_aoa_deg + ray.offset_aoa_deg


@dataclass(frozen=True)
class GaussianPas:
    """IEEE 802.11ad style Gaussian power angular spectrum"""

    sigma_deg: float
    cluster_aoa_deg: float = 90.0
    total_power_mw: float = 1.0

    def __post_init__(self):
        _require(_finite(self.sigma_deg, self.cluster_aoa_deg, self.total_power_mw),
                 'Gaussian PAS parameters must be finite')
        _require(self.sigma_deg > 0, f'sigma_deg must be > 0, got {self.sigma_deg}')
        _require(self.total_power_mw > 0, f'total_power_mw must be > 0, got {self.total_power_mw}')


@dataclass(frozen=True)
class GaussianFit:
    """Fitted density u*exp(-(phi-x)^2/v^2), u in mW/deg"""

    u: float
    x_deg: float
    v_deg: float

    def __post_init__(self):
        _require(_finite(self.u, self.x_deg, self.v_deg), 'fit parameters must be finite')
        _require(self.u > 0, f'u must be > 0, got {self.u}')
        _require(self.v_deg > 0, f'v_deg must be > 0, got {self.v_deg}')

    def density(self, phi_deg: float) -> float:
        return self.u * math.exp(-((phi_deg - self.x_deg) / self.v_deg) ** 2)


Channel = Union[GaussianPas, GaussianFit]


@dataclass(frozen=True)
class PasSamples:
    """Binned power angle profile; density in mW/deg at uniformly spaced bin centers"""

    angles_deg: Tuple[float, ...]
    densities: Tuple[float, ...]
    bin_width_deg: float

    def __post_init__(self):
        _require(len(self.angles_deg) == len(self.densities), 'angles and densities differ in length')
        _require(self.bin_width_deg > 0, 'bin width must be > 0')
        _require(all(d >= 0 for d in self.densities), 'densities must be >= 0')
        tol = 1e-9 * max(1.0, self.bin_width_deg)
        for a, b in zip(self.angles_deg, self.angles_deg[1:]):
            _require(abs((b - a) - self.bin_width_deg) <= tol,
                     'angles must be strictly increasing with spacing equal to the bin width')

    @property
    def total_power_mw(self) -> float:
        return math.fsum(self.densities) * self.bin_width_deg

    @property
    def occupied_bins(self) -> int:
        return sum(1 for d in self.densities if d > 0)

    def as_pairs(self) -> List[Tuple[float, float]]:
        return list(zip(self.angles_deg, self.densities))


class Envelope(str, Enum):
    GAUSSIAN = 'gaussian'
    UNIFORM = 'uniform'
    EXPONENTIAL = 'exponential'


@dataclass(frozen=True)
class SynthesisConfig:
    """Parameters of the synthetic ray-cluster generator

    The envelope shapes ray power over the offset angle; ray amplitudes are
    peak_amplitude * sqrt(envelope). envelope_width_deg is v for the
    Gaussian envelope exp(-(a-c)^2/v^2) and the decay constant for the
    exponential envelope exp(-|a-c|/w).
    """

    n_rays: int = 75
    sas_deg: float = 75.0
    envelope: str = 'gaussian'
    peak_amplitude: float = 1e-2
    envelope_width_deg: float = 9.23
    envelope_center_deg: float = 0.0
    specular_amplitude: float = 0.0
    specular_aoa_deg: float = 90.0
    specular_phase_rad: float = 0.0
    specular_toa_s: float = 0.0
    mean_delay_s: float = 1e-9
    amplitude_jitter: float = 0.0
    seed: int = 0

    @property
    def ray_spacing_deg(self) -> float:
        if self.n_rays < 2:
            return 0.0
        return self.sas_deg / (self.n_rays - 1)

    @staticmethod
    def peak_amplitude_for_density(peak_density: float, n_rays: int, sas_deg: float) -> float:
        """Peak amplitude whose diffuse rays reproduce a PAS density peak (mW/deg)"""
        if n_rays < 2 or sas_deg <= 0:
            raise ConfigError('a density target needs at least two rays and a positive angle spread')
        spacing = sas_deg / (n_rays - 1)
        return math.sqrt(peak_density * spacing * n_rays / sas_deg)


# ---------------------------------------------------------------------------
# Antenna
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UpaParameterSet:
    """Fixed elevation-side triple (delta_phi_y, delta_theta, theta0) for a rectangular UPA

    prefactor_override and k_override replace the closed-form coefficients with
    tabulated values when published results must be reproduced.
    """

    id: Union[int, str]
    delta_phi_y_deg: float
    delta_theta_deg: float
    theta0_deg: float
    prefactor_override: Optional[float] = None
    k_override: Optional[float] = None

    def __post_init__(self):
        _require(_finite(self.delta_phi_y_deg, self.delta_theta_deg, self.theta0_deg),
                 'parameter set angles must be finite')
        _require(self.delta_phi_y_deg > 0 and self.delta_theta_deg > 0,
                 'parameter set beamwidths must be > 0')
        _require(0 <= self.theta0_deg < 90, f'theta0_deg must be in [0, 90), got {self.theta0_deg}')
        for name in ('prefactor_override', 'k_override'):
            value = getattr(self, name)
            _require(value is None or (math.isfinite(value) and value > 0), f'{name} must be > 0')

    @property
    def is_overridden(self) -> bool:
        return self.prefactor_override is not None or self.k_override is not None

    def exact(self) -> 'UpaParameterSet':
        """Same set with closed-form coefficients (overrides dropped)"""
        return UpaParameterSet(self.id, self.delta_phi_y_deg, self.delta_theta_deg, self.theta0_deg)


@dataclass(frozen=True)
class DirectivityCoefficients:
    """D(dphi) = a_coeff * pi * sqrt(k_coeff + sign * dphi^2) / dphi"""

    a_coeff: float
    k_coeff: float
    sign: int
    domain_max_deg: float = math.inf

    def formula(self) -> str:
        op = '+' if self.sign > 0 else '-'
        return f'{self.a_coeff:.4g}*pi*sqrt({self.k_coeff:.4g} {op} dphi^2)/dphi'


@dataclass(frozen=True)
class UpaDesign:
    """Element counts realizing a beam; lambda/2 spacing on both axes"""

    m_elements: int
    n_elements: int
    theta0_deg: float
    phi0_deg: float
    delta_phi_x_deg: float = math.nan
    delta_phi_y_deg: float = math.nan

    def __post_init__(self):
        _require(self.m_elements >= 1 and self.n_elements >= 1, 'element counts must be >= 1')

    @property
    def total_elements(self) -> int:
        return self.m_elements * self.n_elements

    @property
    def in_large_array_regime(self) -> bool:
        return min(self.m_elements, self.n_elements) >= LARGE_ARRAY_MIN_ELEMENTS


@dataclass(frozen=True)
class ConstraintReport:
    c1_pass: bool
    c2_pass: bool
    c3_pass: bool
    c3_sum_deg: float
    c2_value: float = math.nan
    delta_phi_y_deg: float = math.nan

    @property
    def all_pass(self) -> bool:
        return self.c1_pass and self.c2_pass and self.c3_pass

    def failures(self) -> List[str]:
        flags = (('C1', self.c1_pass), ('C2', self.c2_pass), ('C3', self.c3_pass))
        return [name for name, ok in flags if not ok]


# ---------------------------------------------------------------------------
# Power
# ---------------------------------------------------------------------------

class WindowKind(str, Enum):
    RECTANGULAR = 'rectangular'
    TRIANGULAR = 'triangular'


@dataclass(frozen=True)
class BeamPattern:
    kind: WindowKind
    steer_deg: float
    width_deg: float

    def __post_init__(self):
        object.__setattr__(self, 'kind', WindowKind(self.kind))
        _require(self.width_deg > 0, f'beam width must be > 0, got {self.width_deg}')

    @property
    def support(self) -> Tuple[float, float]:
        half = self.width_deg / 2
        return self.steer_deg - half, self.steer_deg + half


@dataclass(frozen=True)
class PercentileSolution:
    eta: float
    beamwidth_deg: float
    received_power_mw: float
    max_power_mw: float
    design: Optional[UpaDesign] = None
    architecture: str = 'UPA'
    ula_elements: Optional[int] = None

    @property
    def elements(self) -> int:
        if self.design is not None:
            return self.design.total_elements
        return self.ula_elements or 0


@dataclass(frozen=True)
class ComparisonRow:
    architecture: str
    eta: float
    beamwidth_deg: float
    elements: int
    power_mw: float
    power_dbm: float
    delta_db_vs_ula_max: float


@dataclass(frozen=True)
class ComparisonSummary:
    """Headline numbers of a UPA vs ULA comparison on one channel"""

    upa_max_mw: float
    ula_max_mw: float
    max_gap_db: float
    upa_50: PercentileSolution
    upa_95: PercentileSolution
    ula_95: PercentileSolution
    upa_50_vs_ula_95_db: float
    note: Optional[str] = None


@dataclass(frozen=True)
class SweepRow:
    delta_phi_deg: float
    directivity: float
    extracted_power_mw: float
    received_power_mw: float
    received_power_dbm: float
    percent_of_max: float


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a command needs: channel, antenna set and the solve/sweep defaults"""

    channel: Union[GaussianPas, GaussianFit, ClusterProfile]
    parameter_set: UpaParameterSet
    wavelength_m: float = 0.005
    phi0_deg: float = 90.0
    etas: Tuple[float, ...] = (0.5, 0.9, 0.95)
    sweep_range: Tuple[float, float, float] = (0.5, 13.5, 0.1)
    bin_width_deg: float = 1.0
    source: Optional[str] = None

    def __post_init__(self):
        _require(self.wavelength_m > 0, f'wavelength_m must be > 0, got {self.wavelength_m}')


@dataclass
class RunManifest:
    """Reproducibility record written next to every command output"""

    command: str
    scenario_path: Optional[str]
    output_paths: List[str]
    timestamp: str
    tool_version: str
    parameters: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)
