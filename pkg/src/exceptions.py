"""Error hierarchy shared by the library and the command-line interface."""

from typing import Optional

# Process exit codes used by the CLI
EXIT_OK = 0
EXIT_CONFIGURATION_ERROR = 1
EXIT_NUMERICAL_FAILURE = 2


class VskError(Exception):
    """Base class for every error raised by this package."""

    exit_code = EXIT_CONFIGURATION_ERROR


class ConfigurationError(VskError, ValueError):
    """Invalid parameters, unknown families or inconsistent experiment settings."""


class DomainError(VskError, ValueError):
    """Argument outside an operation's domain (negative radius, point outside Ω)."""


class UnsupportedOperationError(VskError):
    """Operation not defined for the given object (gradient of a jump at the jump)."""


class NumericalError(VskError, ArithmeticError):
    """Floating-point failure the caller cannot fix by changing configuration alone."""

    exit_code = EXIT_NUMERICAL_FAILURE


class IllConditionedError(NumericalError):
    """
    Symmetric factorization failed even after jitter escalation.

    Attributes:
        jitter: Last absolute jitter added to the diagonal before giving up
    """

    def __init__(self, message: str, jitter: Optional[float] = None) -> None:
        super().__init__(message)
        self.jitter = jitter


class FitError(NumericalError):
    """Every start of a marginal-likelihood fit failed."""


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(error, VskError):
        return error.exit_code
    if isinstance(error, (ValueError, KeyError, TypeError)):
        return EXIT_CONFIGURATION_ERROR
    if isinstance(error, ArithmeticError):
        return EXIT_NUMERICAL_FAILURE
    return EXIT_CONFIGURATION_ERROR
