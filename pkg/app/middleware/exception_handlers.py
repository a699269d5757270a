"""
FastAPI exception handlers for common error types.

Provides custom exception handlers for validation errors, HTTP exceptions
and the simulator's own error hierarchy.
"""

from typing import Union
from fastapi import Request, status
from fastapi.responses import JSONResponse
from fastapi.exceptions import RequestValidationError, HTTPException
from pydantic import ValidationError

from app.logging_config import get_logger
from app.utils.errors import (
    AnalysisError,
    ConfigError,
    PruwError,
    SingularSystem,
    VerificationMismatch,
)


logger = get_logger(__name__)


def _context(request: Request) -> dict:
    return {
        "path": request.url.path,
        "method": request.method,
        "client_ip": request.client.host if request.client else None,
    }


async def validation_exception_handler(
    request: Request, exc: Union[RequestValidationError, ValidationError]
) -> JSONResponse:
    """
    Handle Pydantic validation errors.

    Args:
        request: The request that caused the error
        exc: The validation exception

    Returns:
        JSON response with validation error details
    """
    errors = exc.errors(include_url=False, include_context=False) if isinstance(
        exc, ValidationError
    ) else exc.errors()
    logger.warning("Validation error", extra={**_context(request), "errors": str(errors)})

    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={
            "error": "Validation error",
            "detail": [
                {"loc": list(e.get("loc", ())), "msg": e.get("msg"), "type": e.get("type")}
                for e in errors
            ],
            "path": request.url.path,
        },
    )


async def http_exception_handler(request: Request, exc: HTTPException) -> JSONResponse:
    context = {**_context(request), "status_code": exc.status_code}

    if exc.status_code >= 500:
        logger.error(f"HTTP {exc.status_code} error", extra={**context, "detail": exc.detail})
    else:
        logger.warning(f"HTTP {exc.status_code} error", extra={**context, "detail": exc.detail})

    return JSONResponse(
        status_code=exc.status_code,
        content={
            "error": exc.detail,
            "status_code": exc.status_code,
            "path": request.url.path,
        },
    )


def status_for(exc: PruwError) -> int:
    """422 for configuration errors, 409 for verification mismatches, 400 otherwise."""
    if isinstance(exc, (ConfigError, SingularSystem, AnalysisError)):
        return status.HTTP_422_UNPROCESSABLE_ENTITY
    if isinstance(exc, VerificationMismatch):
        return status.HTTP_409_CONFLICT
    return status.HTTP_400_BAD_REQUEST


async def pruw_exception_handler(request: Request, exc: PruwError) -> JSONResponse:
    """
    Handle simulator errors.

    Args:
        request: The request that caused the error
        exc: The simulator exception

    Returns:
        JSON response naming the error type
    """
    status_code = status_for(exc)
    logger.warning(
        "Simulator error",
        extra={
            **_context(request),
            "error_type": type(exc).__name__,
            "error_message": str(exc),
            "status_code": status_code,
        },
    )

    return JSONResponse(
        status_code=status_code,
        content={
            "error": type(exc).__name__,
            "detail": str(exc),
            "path": request.url.path,
        },
    )


async def generic_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    """Last-resort 500 for anything not mapped above."""
    logger.error(
        "Unhandled exception",
        extra={
            **_context(request),
            "error_type": type(exc).__name__,
            "error_message": str(exc),
        },
        exc_info=True,
    )

    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={
            "error": "Internal server error",
            "detail": "An unexpected error occurred",
            "path": request.url.path,
        },
    )


def register_exception_handlers(app):
    app.add_exception_handler(RequestValidationError, validation_exception_handler)
    app.add_exception_handler(ValidationError, validation_exception_handler)
    app.add_exception_handler(HTTPException, http_exception_handler)
    app.add_exception_handler(PruwError, pruw_exception_handler)
    app.add_exception_handler(Exception, generic_exception_handler)

    logger.info("Exception handlers registered")
