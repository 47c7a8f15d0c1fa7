"""
Error types for BeamPlan

Configuration problems map to CLI exit code 2, numeric and domain
failures to exit code 3.
"""

from typing import Optional


class BeamPlanError(Exception):
    """Base class for every error raised by BeamPlan"""

    exit_code = 1


class ConfigError(BeamPlanError, ValueError):
    """Invalid scenario, flag or generator configuration"""

    exit_code = 2


class RayFileError(ConfigError):
    """Malformed ray CSV; line_number points at the offending line (1-based)"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NumericError(BeamPlanError):
    exit_code = 3


class DomainError(NumericError, ValueError):
    """Input outside the domain of an operation"""


class BracketError(NumericError):
    """Target function does not change sign across the bracket"""


class ConvergenceError(NumericError):
    """Iteration or subdivision budget exhausted"""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DegenerateInputError(NumericError, ValueError):
    """Input carries too little information for the requested operation"""


class NoSolutionError(DomainError):
    """Requested power fraction lies outside what the beamwidth range can reach"""

    def __init__(self, message: str, floor: Optional[float] = None):
        super().__init__(message)
        self.floor = floor


class LimitNotMaximumError(DomainError):
    """Received power somewhere exceeds its small-beamwidth limit"""

    def __init__(self, message: str, peak_deg: Optional[float] = None, peak_mw: Optional[float] = None):
        super().__init__(message)
        self.peak_deg = peak_deg
        self.peak_mw = peak_mw


class SmallArrayWarning(UserWarning):
    """Array smaller than the large-array regime the directivity formulas assume"""


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, BeamPlanError):
        return exc.exit_code
    return 1
