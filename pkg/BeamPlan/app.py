import os
import logging
from dataclasses import dataclass
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

VERSION = '0.1.0'

TRUTHY = {'1', 'true', 'yes', 'on'}

LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'


def _env_flag(name: str, default: bool = False) -> bool:
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in TRUTHY


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    if not value:
        return default
    try:
        return max(1, int(value))
    except ValueError:
        logging.getLogger(__name__).warning("Ignoring non-integer %s=%r", name, value)
        return default


@dataclass(frozen=True)
class Settings:
    """Runtime settings read from the environment (and .env)"""

    no_manifest: bool = False
    log_level: str = 'WARNING'
    workers: int = 1
    exact_eq13: bool = False

    @classmethod
    def from_env(cls) -> 'Settings':
        return cls(
            no_manifest=_env_flag('BEAMPLAN_NO_MANIFEST'),
            log_level=os.environ.get('BEAMPLAN_LOG_LEVEL', 'WARNING').upper(),
            workers=_env_int('BEAMPLAN_WORKERS', 1),
            exact_eq13=_env_flag('BEAMPLAN_EXACT_EQ13'),
        )


def configure_logging(level) -> None:
    """Configure root logging once; later calls only change the level"""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    root = logging.getLogger()
    if root.handlers:
        root.setLevel(level)
    else:
        logging.basicConfig(level=level, format=LOG_FORMAT)


# Settings snapshot taken at import; commands re-read it so tests can monkeypatch the env
settings = Settings.from_env()

# Configure logging
configure_logging(settings.log_level)
