import logging

import pytest

from BeamPlan.app import Settings, configure_logging
from BeamPlan.exceptions import (
    BracketError,
    ConfigError,
    DomainError,
    NoSolutionError,
    RayFileError,
    exit_code_for,
)


def test_settings_defaults():
    assert Settings.from_env() == Settings(no_manifest=False, log_level='WARNING', workers=1, exact_eq13=False)


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv('BEAMPLAN_NO_MANIFEST', 'yes')
    monkeypatch.setenv('BEAMPLAN_LOG_LEVEL', 'debug')
    monkeypatch.setenv('BEAMPLAN_WORKERS', '4')
    monkeypatch.setenv('BEAMPLAN_EXACT_EQ13', '1')
    assert Settings.from_env() == Settings(no_manifest=True, log_level='DEBUG', workers=4, exact_eq13=True)


@pytest.mark.parametrize('raw, workers', [('0', 1), ('-3', 1), ('many', 1), ('', 1), ('8', 8)])
def test_workers_are_sanitized(monkeypatch, raw, workers):
    monkeypatch.setenv('BEAMPLAN_WORKERS', raw)
    assert Settings.from_env().workers == workers


def test_configure_logging_sets_root_level():
    root = logging.getLogger()
    previous = root.level
    try:
        configure_logging('info')
        assert root.level == logging.INFO
        configure_logging('nonsense')
        assert root.level == logging.WARNING
        configure_logging(logging.DEBUG)
        assert root.level == logging.DEBUG
    finally:
        root.setLevel(previous)


@pytest.mark.parametrize('exc, code', [
    (ConfigError('bad flag'), 2),
    (RayFileError('bad value', 6), 2),
    (DomainError('outside'), 3),
    (NoSolutionError('unreachable', floor=0.3), 3),
    (BracketError('no sign change'), 3),
    (RuntimeError('boom'), 1),
])
def test_exit_codes(exc, code):
    assert exit_code_for(exc) == code


def test_ray_file_error_message():
    error = RayFileError('amplitude is not a number', 6)
    assert str(error) == 'line 6: amplitude is not a number'
    assert isinstance(error, ValueError)
