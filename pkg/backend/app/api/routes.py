"""
Main API routes for orbispec.
"""
import asyncio
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Any, Callable, Optional

from fastapi import APIRouter, Query

from app.config import settings
from app.core.commands import command_runner
from app.geometry.catalog import entry_by_name
from app.models.request import (
    CompareRequest,
    GroupRequest,
    HeatRequest,
    OutputFormat,
    SpectrumRequest,
    TraceCheckRequest,
)
from app.models.response import (
    CatalogListing,
    CompareResponse,
    HeatResponse,
    KrawtchoukResponse,
    SpectrumResponse,
    StrataResponse,
    TraceResponse,
    ValidateResponse,
)
from app.services.group_loader import group_loader
from app.services.logger import app_logger
from app.utils.serialization import jsonable

router = APIRouter()


async def _in_executor(fn: Callable[..., Any], *args, **kwargs) -> Any:
    """Run CPU-bound work in a thread pool so the event loop stays responsive."""
    loop = asyncio.get_event_loop()
    with ThreadPoolExecutor() as executor:
        return await loop.run_in_executor(executor, partial(fn, *args, **kwargs))


@router.get("/")
async def root():
    """Root endpoint."""
    return {
        "message": "orbispec API",
        "version": "1.0.0",
        "docs": "/docs",
        "endpoints": {
            "validate": "POST /validate",
            "spectrum": "POST /spectrum",
            "compare": "POST /compare",
            "strata": "POST /strata",
            "heat": "POST /heat",
            "trace-check": "POST /trace-check",
            "krawtchouk": "GET /krawtchouk?d=&p=",
            "catalog": "GET /catalog, GET /catalog/{name}",
        }
    }


@router.post("/validate", response_model=ValidateResponse)
async def validate_group(request: GroupRequest):
    """Build the group and list its elements with their eigenvalue types."""
    group = await _in_executor(group_loader.from_request, request)
    return command_runner.validate(group)


@router.post("/spectrum", response_model=SpectrumResponse)
async def spectrum(request: SpectrumRequest):
    """
    Exact p-spectrum up to max_norm2.

    Args:
        request: Group, degree p and bound on mu^2

    Returns:
        SpectrumResponse with nonzero multiplicities in increasing mu^2
    """
    app_logger.info(f"Received /spectrum request: p={request.p}, max_norm2={request.max_norm2}")
    group = await _in_executor(group_loader.from_request, request)
    return await _in_executor(
        command_runner.spectrum, group, request.p, request.max_norm2, OutputFormat.JSON,
        settings.ENUMERATION_CAP
    )


@router.post("/compare", response_model=CompareResponse)
async def compare(request: CompareRequest):
    """Exact comparison of two p-spectra up to the same bound."""
    a = await _in_executor(group_loader.from_request, request.a)
    b = await _in_executor(group_loader.from_request, request.b)
    return await _in_executor(command_runner.compare, a, b, request.p, request.max_norm2, settings.ENUMERATION_CAP)


@router.post("/strata", response_model=StrataResponse)
async def strata(request: GroupRequest):
    group = await _in_executor(group_loader.from_request, request)
    return await _in_executor(command_runner.strata, group)


@router.post("/heat", response_model=HeatResponse)
async def heat(request: HeatRequest):
    """Heat expansion, parity invariants and manifold verdicts for the p-form Laplacian."""
    group = await _in_executor(group_loader.from_request, request)
    return await _in_executor(command_runner.heat, group, request.p)


@router.post("/trace-check", response_model=TraceResponse)
async def trace_check(request: TraceCheckRequest):
    """Truncated traces against the assembled expansion over a t grid."""
    group = await _in_executor(group_loader.from_request, request)
    return await _in_executor(
        command_runner.trace_check, group, request.p, request.t, request.max_norm2, settings.ENUMERATION_CAP
    )


@router.get("/krawtchouk", response_model=KrawtchoukResponse)
async def krawtchouk(
    d: int = Query(..., ge=1, le=64, description="Dimension"),
    p: Optional[int] = Query(None, ge=0, description="Degree; omit for the blind-degree table only")
):
    return command_runner.krawtchouk(d, p)


@router.get("/catalog", response_model=CatalogListing)
async def catalog():
    return await _in_executor(command_runner.catalog_list)


@router.get("/catalog/{name}")
async def catalog_entry(name: str):
    """Group file of a catalog entry together with its claims."""
    entry = await _in_executor(entry_by_name, name)
    return jsonable({**entry.to_dict(), "group": command_runner.catalog_emit(name)})
