"""
Error Types
Exception hierarchy shared by the toolkit.

Each error subclasses the closest builtin so callers that already catch
ValueError / ArithmeticError keep working. The CLI maps them to exit codes
via exit_code_for.
"""

from typing import Optional


class LobToolkitError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 1


class InvalidStateError(LobToolkitError, ValueError):
    """Order-book state outside the admissible set, or bad pile/asset."""

    exit_code = 2


class IllicitEventError(LobToolkitError, ValueError):
    """Event cannot occur in the current order-book state."""

    exit_code = 2


class MissingDrawsError(LobToolkitError, ValueError):
    """Not enough regeneration volumes supplied for a price move."""

    exit_code = 2


class VolumeOverflowError(LobToolkitError, OverflowError):
    """Pile volume left the signed 64-bit range."""

    exit_code = 3


class ParameterFaultError(LobToolkitError, ArithmeticError):
    """Numerical fault attributable to the parameter point."""

    exit_code = 3


class ExplosionGuardError(LobToolkitError, RuntimeError):
    """Simulated path produced more events than the configured cap."""

    exit_code = 3


class InactiveEventError(LobToolkitError, ValueError):
    """Recorded event type has zero intensity in the recorded state."""

    exit_code = 2


class NonCompliantModelError(LobToolkitError, ValueError):
    """Model does not satisfy the assumptions a check relies on."""

    exit_code = 3


class ConfigValidationError(LobToolkitError, ValueError):
    """Configuration failed schema validation."""

    exit_code = 2


class LogValidationError(LobToolkitError, ValueError):
    """Event log failed validation; carries the offending line when known."""

    exit_code = 2

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def exit_code_for(error: BaseException) -> int:
    """Exit code for an exception raised while running a command."""
    if isinstance(error, LobToolkitError):
        return error.exit_code
    if isinstance(error, (ValueError, KeyError, FileNotFoundError)):
        return EXIT_VALIDATION
    if isinstance(error, (ArithmeticError, FloatingPointError)):
        return EXIT_NUMERICAL
    return 1
