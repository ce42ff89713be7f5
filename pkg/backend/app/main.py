"""
FastAPI application entry point for orbispec.
"""
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from app.config import settings
from app.api import health, routes
from app.core.exceptions import ConfigurationError, OrbispecException
from app.models.response import ErrorResponse
from app.services.logger import app_logger
from app.utils.serialization import jsonable

# Create FastAPI application
app = FastAPI(
    title="orbispec API",
    description="Exact Hodge spectra, singular strata and heat invariants of flat orbifolds",
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc"
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(health.router, tags=["Health"])
app.include_router(
    routes.router,
    tags=["Orbifolds"],
    prefix="/api/v1",
    responses={code: {"model": ErrorResponse} for code in (400, 413, 422, 500)}
)


# Error handlers
@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Handle FastAPI validation errors."""
    errors = exc.errors()
    app_logger.error(f"Validation error on {request.url.path}: {errors}")
    return JSONResponse(
        status_code=422,
        content={
            "error": "RequestValidationError",
            "message": "Request body does not match the schema",
            "status_code": 422,
            "context": {"errors": jsonable([{k: str(v) for k, v in e.items()} for e in errors])}
        }
    )


@app.exception_handler(OrbispecException)
async def orbispec_exception_handler(request: Request, exc: OrbispecException):
    """Handle orbispec exceptions with their own status codes."""
    log = app_logger.error if exc.status_code >= 500 else app_logger.warning
    log(f"{type(exc).__name__} on {request.url.path}: {exc.message}")
    return JSONResponse(status_code=exc.status_code, content=jsonable(exc.to_report()))


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    """Handle general exceptions."""
    app_logger.exception(f"Unhandled error on {request.url.path}: {exc}")
    return JSONResponse(
        status_code=500,
        content={
            "error": "InternalError",
            "message": str(exc) if settings.APP_ENV == "development" else "Internal server error",
            "status_code": 500,
            "context": {}
        }
    )


@app.on_event("startup")
async def startup_event():
    """Validate configuration on startup."""
    try:
        settings.validate()
        app_logger.info("Configuration validated successfully")
    except ConfigurationError as e:
        app_logger.warning(f"Configuration warning: {e.message}")

    app_logger.info(f"orbispec API started on {settings.API_HOST}:{settings.API_PORT}")


@app.on_event("shutdown")
async def shutdown_event():
    app_logger.info("orbispec API shutting down")


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host=settings.API_HOST,
        port=settings.API_PORT,
        reload=settings.APP_ENV == "development"
    )
