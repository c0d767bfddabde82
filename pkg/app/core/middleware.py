"""Exception handling around subcommands: exit codes and error documents"""

import json
import sys
from typing import Callable

from app.config.logging import get_logger
from app.core.exceptions import (
    ConfigurationError,
    CouplingCollapseError,
    DiagnosticsError,
    FiberingError,
    NodalSolverException,
    NonConvergenceError,
    PotentialConditionError,
    StorageError,
    SymmetryError,
    ValidationError,
)
from app.models.responses import ErrorResponse

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_STORAGE = 4


def map_exception_to_exit_code(exc: BaseException) -> int:
    """Map custom exceptions to process exit codes"""
    mapping = [
        (PotentialConditionError, EXIT_VALIDATION),
        (ValidationError, EXIT_VALIDATION),
        (ConfigurationError, EXIT_VALIDATION),
        (SymmetryError, EXIT_VALIDATION),
        (NonConvergenceError, EXIT_NUMERICAL),
        (CouplingCollapseError, EXIT_NUMERICAL),
        (FiberingError, EXIT_NUMERICAL),
        (DiagnosticsError, EXIT_NUMERICAL),
        (StorageError, EXIT_STORAGE),
    ]
    for exc_type, code in mapping:
        if isinstance(exc, exc_type):
            return code
    return EXIT_UNEXPECTED


def error_response(exc: BaseException) -> ErrorResponse:
    detail = None
    if isinstance(exc, PotentialConditionError):
        detail = {"failed_conditions": exc.failed_conditions}
    return ErrorResponse(
        error=str(exc),
        error_type=exc.__class__.__name__,
        exit_code=map_exception_to_exit_code(exc),
        detail=detail,
    )


def run_command(handler: Callable[[], int]) -> int:
    """Run a subcommand, turning exceptions into an exit code and an error line on stdout"""
    try:
        return handler()
    except NodalSolverException as e:
        response = error_response(e)
        logger.error(f"{response.error_type}: {e}")
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        response = ErrorResponse(error=str(e), error_type="UnexpectedError", exit_code=EXIT_UNEXPECTED)
    sys.stdout.write(json.dumps(response.model_dump(mode="json"), sort_keys=True) + "\n")
    return response.exit_code
