"""
Response models for orbispec.

Every exact quantity is a rational string; floats are plain JSON numbers.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class ShellEntry(BaseModel):
    """One eigenvalue of a p-spectrum."""
    mu2: str = Field(..., description="Exact squared dual norm mu^2")
    multiplicity: int = Field(..., ge=0, description="Multiplicity in the p-spectrum")
    eigenvalue: float = Field(..., description="4 pi^2 mu^2")


class DualShell(BaseModel):
    """Number of dual lattice vectors of one squared norm."""
    mu2: str = Field(..., description="Exact squared dual norm mu^2")
    count: int = Field(..., ge=1, description="Dual vectors in the shell")


class SpectrumResponse(BaseModel):
    """A p-spectrum complete up to the bound; zero multiplicities omitted."""
    group: str = Field(..., description="Group label")
    p: int = Field(..., description="Form degree")
    bound: str = Field(..., description="Largest mu^2 included")
    entries: List[ShellEntry] = Field(..., description="Eigenvalues in increasing order")
    shells: List[DualShell] = Field(default_factory=list, description="Dual lattice shells up to the bound")


class FirstDifference(BaseModel):
    mu2: str
    multiplicity_a: int
    multiplicity_b: int


class CompareResponse(BaseModel):
    """Outcome of an exact table comparison."""
    verdict: str = Field(..., description="'equal' or 'first_difference'")
    first_difference: Optional[FirstDifference] = Field(None, description="Smallest mu^2 where the tables differ")


class StratumResponse(BaseModel):
    """One singular stratum."""
    dim: int
    codim: int
    volume: float
    volume_squared: str = Field(..., description="Exact squared volume")
    isotropy_order: int
    primary: bool
    iso_max_types: List[Dict[str, Any]] = Field(..., description="Eigenvalue types of the Iso^max elements")
    component_count_upstairs: int
    representative: Dict[str, Any] = Field(..., description="Base point and directions of one lift")
    adjacent_primary: Optional[int] = Field(None, description="Primary strata touching a non-primary stratum")


class StrataResponse(BaseModel):
    group: str
    strata: List[StratumResponse]


class HeatResponse(BaseModel):
    """Heat invariants of the p-form Laplacian."""
    group: str
    p: int
    expansion: Dict[str, Any] = Field(..., description="Exponent to coefficient terms")
    B_plus: Dict[str, Any]
    B_minus: Dict[str, Any]
    obstruction: Dict[str, Any]
    discriminator: Dict[str, Any] = Field(..., description="Manifold discriminator verdict or why it does not apply")


class TraceResponse(BaseModel):
    """Truncated traces against the assembled expansion."""
    group: str
    p: int
    expansion: Dict[str, Any]
    samples: List[Dict[str, Any]]
    routes_agree: bool
    decay_rate: Optional[float] = None
    worst_residual: float


class KrawtchoukResponse(BaseModel):
    d: int
    p: Optional[int] = None
    values: Optional[List[int]] = Field(None, description="K_p^d(k) for k = 0..d")
    zeros: Optional[List[int]] = None
    blind_degrees: Dict[str, List[int]] = Field(..., description="Odd codimension to degrees blind to it")


class CatalogListing(BaseModel):
    entries: List[Dict[str, Any]]


class ValidateResponse(BaseModel):
    valid: bool
    order: int
    dimension: int
    elements: List[Dict[str, Any]]


class ErrorResponse(BaseModel):
    """Structured error report."""
    error: str
    message: str
    status_code: int
    context: Dict[str, Any] = Field(default_factory=dict)
