import os

import pytest

from BeamPlan.models import GaussianFit, GaussianPas
from BeamPlan.registry import get_parameter_set

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), 'fixtures')

_ENV_VARS = ('BEAMPLAN_NO_MANIFEST', 'BEAMPLAN_LOG_LEVEL', 'BEAMPLAN_WORKERS', 'BEAMPLAN_EXACT_EQ13')


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in _ENV_VARS:
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def fixture_path():
    def _path(name):
        return os.path.join(FIXTURES_DIR, name)
    return _path


@pytest.fixture
def set4():
    """Set 4 with the tabulated coefficients (A=45.9, K=190)"""
    return get_parameter_set(4)


@pytest.fixture
def set4_exact():
    return get_parameter_set(4, exact_eq13=True)


@pytest.fixture
def conference_pas():
    return GaussianPas(sigma_deg=5.0, cluster_aoa_deg=90.0, total_power_mw=1.0)


@pytest.fixture
def conference_fit():
    return GaussianFit(u=6.434e-5, x_deg=90.0, v_deg=9.23)


@pytest.fixture
def no_manifest(monkeypatch):
    monkeypatch.setenv('BEAMPLAN_NO_MANIFEST', '1')
