"""Custom exception classes for the MANET simulator."""
from typing import Optional, Dict, Any


class SimulatorException(Exception):
    """Base exception for all application-specific exceptions."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(SimulatorException):
    """Raised when a scenario or request violates an invariant."""
    pass


class ScenarioParseError(ValidationError):
    """Raised when a scenario file cannot be parsed; details carry the line number."""
    pass


class ConfigurationError(SimulatorException):
    """Exception raised for process configuration errors."""
    pass


class NotFoundError(SimulatorException):
    """Raised for unknown node ids, run ids or sweep ids."""
    pass


class SchedulingError(SimulatorException):
    """Raised when an event is scheduled before the current clock."""
    pass


class RandomStreamError(SimulatorException):
    """Raised for invalid draws on a random stream."""
    pass


class MobilityError(SimulatorException):
    """Raised for inconsistent mobility state, e.g. a member without a group."""
    pass


class TraceParseError(SimulatorException):
    """Raised for malformed trace lines; details carry the line number."""
    pass


class MetricsError(SimulatorException):
    """Raised when counts violate report invariants."""
    pass


class SweepError(SimulatorException):
    """Raised when a sweep cell fails; details identify the cell."""
    pass


class PlotError(SimulatorException):
    """Raised for unknown metrics or unusable aggregate CSVs."""
    pass


def sanitize_error_message(error: Exception, include_details: bool = False) -> str:
    """
    Sanitize error messages before they leave the service.

    Args:
        error: The exception to sanitize
        include_details: Whether to include detailed error information (dev only)

    Returns:
        Sanitized error message
    """
    from app.core.config import settings

    if isinstance(error, SimulatorException):
        return error.message

    # Filesystem paths and interpreter internals stay in the logs
    if settings.DEBUG or include_details:
        return f"{type(error).__name__}: {error}"
    return "An error occurred. Please try again."
