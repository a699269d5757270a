"""
Error handling utilities for the command-line runner.

Maps simulator exceptions to exit codes and logs them with context.
"""

from typing import Any, Dict, Optional

from pydantic import ValidationError

from app.logging_config import get_logger
from app.utils.errors import MalformedTranscript, PruwError, VerificationMismatch


logger = get_logger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2


class ErrorHandler:
    """
    Centralized error handler for CLI commands.

    0 means verified, 1 a verification mismatch (decoded data, costs or
    transcript tallies disagree), 2 a configuration or input error, including
    malformed protocol inputs. Anything outside the simulator's hierarchy is
    re-raised.
    """

    def __init__(self, command: str):
        self.command = command

    def exit_code_for(self, error: BaseException) -> int:
        """Exit code for a handled exception."""
        if isinstance(error, (VerificationMismatch, MalformedTranscript)):
            return EXIT_MISMATCH
        if isinstance(error, (PruwError, ValidationError)):
            return EXIT_CONFIG
        raise error

    def handle(self, error: BaseException, context: Optional[Dict[str, Any]] = None) -> int:
        """
        Log an exception and return its exit code.

        Args:
            error: The exception that occurred
            context: Optional context information (case, paths, etc.)

        Returns:
            Process exit code
        """
        context = context or {}
        code = self.exit_code_for(error)

        if code == EXIT_CONFIG:
            logger.error(
                f"Invalid configuration for {self.command}",
                extra={
                    "error_type": type(error).__name__,
                    "error_message": str(error),
                    "exit_code": code,
                    **context,
                },
            )
        else:
            logger.error(
                f"{self.command} failed verification",
                extra={
                    "error_type": type(error).__name__,
                    "error_message": str(error),
                    "exit_code": code,
                    **context,
                },
                exc_info=not isinstance(error, VerificationMismatch),
            )
        return code

    def describe(self, error: BaseException) -> str:
        """One-line diagnostic for stderr."""
        if isinstance(error, ValidationError):
            details = "; ".join(
                f"{'.'.join(str(p) for p in e['loc']) or 'config'}: {e['msg']}" for e in error.errors()
            )
            return f"{self.command}: invalid configuration: {details}"
        return f"{self.command}: {type(error).__name__}: {error}"
