"""
Liveness and readiness endpoints.
"""
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Dict

from fastapi import APIRouter

from app.config import settings
from app.core.exceptions import OrbispecException
from app.geometry.catalog import entry_by_name
from app.geometry.heat import parity_invariants
from app.geometry.krawtchouk import krawtchouk
from app.geometry.strata import strata

router = APIRouter()

SERVICE = "orbispec API"
VERSION = "1.0.0"


def _self_check() -> Dict[str, Any]:
    """Two exact computations with known answers: K_2^4(1) = 0 and B_+^0 = 3/4 for the pillow."""
    try:
        plus, _ = parity_invariants(strata(entry_by_name("pillow").group, threads=1), 0)
        passed = krawtchouk(4, 2, 1) == 0 and plus.exact == Fraction(3, 4)
        return {"passed": passed}
    except OrbispecException as e:
        return {"passed": False, "error": type(e).__name__, "message": e.message}


@router.get("/health")
async def health_check() -> Dict[str, str]:
    """Liveness: the process is up."""
    return {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "service": SERVICE
    }


@router.get("/health/detailed")
async def detailed_health_check() -> Dict[str, Any]:
    """
    Readiness: runs a small exact self-check and reports the limits in force.

    Status is "degraded" when the self-check fails.
    """
    check = _self_check()
    return {
        "status": "healthy" if check["passed"] else "degraded",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "service": SERVICE,
        "version": VERSION,
        "environment": settings.APP_ENV,
        "self_check": check,
        "config": {
            "enumeration_cap": settings.ENUMERATION_CAP,
            "order_cap": settings.ORDER_CAP,
            "threads": settings.THREADS,
            "default_t_grid": settings.default_t_grid,
            "file_logging": settings.log_dir is not None,
        }
    }
