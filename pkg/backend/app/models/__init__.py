"""
Pydantic models for orbispec.
"""
from app.models.request import (
    Command,
    CompareRequest,
    GeneratorSpec,
    GroupRequest,
    GroupSpec,
    HeatRequest,
    OutputFormat,
    RunConfig,
    SpectrumRequest,
    TraceCheckRequest,
)
from app.models.response import (
    CatalogListing,
    CompareResponse,
    ErrorResponse,
    HeatResponse,
    KrawtchoukResponse,
    ShellEntry,
    SpectrumResponse,
    StrataResponse,
    StratumResponse,
    TraceResponse,
    ValidateResponse,
)

__all__ = [
    # Request models
    "Command",
    "CompareRequest",
    "GeneratorSpec",
    "GroupRequest",
    "GroupSpec",
    "HeatRequest",
    "OutputFormat",
    "RunConfig",
    "SpectrumRequest",
    "TraceCheckRequest",
    # Response models
    "CatalogListing",
    "CompareResponse",
    "ErrorResponse",
    "HeatResponse",
    "KrawtchoukResponse",
    "ShellEntry",
    "SpectrumResponse",
    "StrataResponse",
    "StratumResponse",
    "TraceResponse",
    "ValidateResponse",
]
