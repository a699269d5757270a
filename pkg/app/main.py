"""
Main FastAPI application entry point.
"""

from contextlib import asynccontextmanager

from fastapi import FastAPI

from app import __version__
from app.config import get_settings
from app.logging_config import get_logger, setup_logging
from app.middleware.error_middleware import (
    ErrorHandlingMiddleware,
    RequestLoggingMiddleware,
)
from app.middleware.exception_handlers import register_exception_handlers
from app.routes.analysis import router as analysis_router


logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Application lifespan manager.
    Handles startup and shutdown events.
    """
    settings = get_settings()
    logger.info(
        "Starting PRUW analysis service",
        extra={
            "environment": settings.environment,
            "log_level": settings.log_level,
            "field_modulus": settings.field_modulus,
            "version": __version__,
        },
    )

    yield

    logger.info("Shutting down PRUW analysis service")


def create_app() -> FastAPI:
    """
    Create and configure the FastAPI application.

    Returns:
        Configured FastAPI application instance
    """
    settings = get_settings()

    use_json = settings.environment == "production"
    setup_logging(log_level=settings.log_level, use_json=use_json)

    app = FastAPI(
        title="PRUW Simulator",
        description="Private read-update-write for sparse federated learning: simulation and analysis",
        version=__version__,
        lifespan=lifespan,
    )

    # last added runs first
    app.add_middleware(RequestLoggingMiddleware)
    app.add_middleware(ErrorHandlingMiddleware)

    register_exception_handlers(app)

    app.include_router(analysis_router)

    @app.get("/health")
    async def health_check():
        """Health check endpoint."""
        return {
            "status": "healthy",
            "version": __version__,
            "environment": settings.environment,
        }

    logger.info("FastAPI application created successfully")

    return app


app = create_app()


if __name__ == "__main__":
    import uvicorn

    settings = get_settings()
    uvicorn.run("app.main:app", host=settings.host, port=settings.port)
