"""
Request models for orbispec.

Exact rationals cross every boundary as strings ("1/3", "-2", "0") or plain
integers; they are parsed with fractions.Fraction downstream.
"""
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator


RationalText = Union[str, int]


def _check_rational(value: RationalText) -> RationalText:
    if isinstance(value, bool):
        raise ValueError(f"expected a rational number, got {value!r}")
    if isinstance(value, str):
        try:
            Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"'{value}' is not a rational number of the form p/q")
    return value


class Command(str, Enum):
    """CLI subcommands."""
    VALIDATE = "validate"
    SPECTRUM = "spectrum"
    COMPARE = "compare"
    STRATA = "strata"
    HEAT = "heat"
    TRACE_CHECK = "trace-check"
    KRAWTCHOUK = "krawtchouk"
    CATALOG = "catalog"


class OutputFormat(str, Enum):
    """Output encoding for tables."""
    JSON = "json"
    CSV = "csv"


class GeneratorSpec(BaseModel):
    """One affine generator x -> M x + a in lattice coordinates."""
    matrix: List[List[int]] = Field(..., description="Integer matrix acting on lattice coordinates")
    translation: Optional[List[RationalText]] = Field(
        None,
        description="Translation part in lattice coordinates, taken mod 1 (defaults to zero)"
    )

    @field_validator("translation")
    @classmethod
    def translation_is_rational(cls, value):
        if value is not None:
            for entry in value:
                _check_rational(entry)
        return value


class GroupSpec(BaseModel):
    """
    A crystallographic group file: the Gram matrix of the translation
    lattice and affine generators for the holonomy.
    """
    dimension: int = Field(..., ge=1, le=12, description="Dimension d")
    gram: List[List[RationalText]] = Field(..., description="d x d Gram matrix, rational entries")
    generators: List[GeneratorSpec] = Field(default_factory=list, description="Affine generators")
    name: Optional[str] = Field(None, description="Optional label carried into reports")

    @field_validator("gram")
    @classmethod
    def gram_is_rational(cls, value):
        for row in value:
            for entry in row:
                _check_rational(entry)
        return value

    @model_validator(mode="after")
    def shapes_match(self):
        d = self.dimension
        if len(self.gram) != d or any(len(row) != d for row in self.gram):
            raise ValueError(f"gram must be {d}x{d}")
        for index, generator in enumerate(self.generators):
            if len(generator.matrix) != d or any(len(row) != d for row in generator.matrix):
                raise ValueError(f"generator {index} matrix must be {d}x{d}")
            if generator.translation is not None and len(generator.translation) != d:
                raise ValueError(f"generator {index} translation must have {d} entries")
        return self

    class Config:
        json_schema_extra = {
            "example": {
                "dimension": 2,
                "gram": [["1", "0"], ["0", "1"]],
                "generators": [{"matrix": [[0, -1], [1, 0]], "translation": ["0", "0"]}],
                "name": "pillow"
            }
        }


class GroupRequest(BaseModel):
    """A group given inline or by catalog name; exactly one must be set."""
    group: Optional[GroupSpec] = Field(None, description="Inline group")
    catalog: Optional[str] = Field(None, description="Catalog entry name, e.g. 'pillow' or 'O2-d4'")

    @model_validator(mode="after")
    def exactly_one_source(self):
        if (self.group is None) == (self.catalog is None):
            raise ValueError("give exactly one of 'group' or 'catalog'")
        return self

    class Config:
        json_schema_extra = {"example": {"catalog": "pillow"}}


class SpectrumRequest(GroupRequest):
    """Request for a p-spectrum table."""
    p: int = Field(..., ge=0, le=12, description="Form degree")
    max_norm2: RationalText = Field(..., description="Largest mu^2 to include")

    @field_validator("max_norm2")
    @classmethod
    def max_norm2_is_rational(cls, value):
        return _check_rational(value)

    class Config:
        json_schema_extra = {"example": {"catalog": "pillow", "p": 1, "max_norm2": "4"}}


class CompareRequest(BaseModel):
    """Request for an exact isospectrality comparison."""
    a: GroupRequest = Field(..., description="First group")
    b: GroupRequest = Field(..., description="Second group")
    p: int = Field(..., ge=0, le=12, description="Form degree")
    max_norm2: RationalText = Field(..., description="Largest mu^2 to compare")

    @field_validator("max_norm2")
    @classmethod
    def max_norm2_is_rational(cls, value):
        return _check_rational(value)

    class Config:
        json_schema_extra = {
            "example": {"a": {"catalog": "pillow"}, "b": {"catalog": "square"}, "p": 1, "max_norm2": "4"}
        }


class HeatRequest(GroupRequest):
    """Request for heat invariants of the p-form Laplacian."""
    p: int = Field(..., ge=0, le=12, description="Form degree")

    class Config:
        json_schema_extra = {"example": {"catalog": "O3-d6", "p": 0}}


class TraceCheckRequest(GroupRequest):
    """Request for a truncated-trace versus expansion check."""
    p: int = Field(..., ge=0, le=12, description="Form degree")
    t: Optional[List[float]] = Field(None, description="Times to sample (defaults to the configured grid)")
    max_norm2: Optional[RationalText] = Field(None, description="Starting truncation bound")

    @field_validator("t")
    @classmethod
    def times_positive(cls, value):
        if value is not None and any(t <= 0 for t in value):
            raise ValueError("every t must be positive")
        return value

    class Config:
        json_schema_extra = {"example": {"catalog": "pillow", "p": 0, "t": [0.1, 0.05, 0.02]}}


class RunConfig(BaseModel):
    """One CLI invocation after flag parsing."""
    command: Command
    group: Optional[str] = Field(None, description="Group file (or catalog name with 'catalog:' prefix)")
    group_b: Optional[str] = Field(None, description="Second group for compare")
    p: Optional[int] = Field(None, ge=0, le=12)
    max_norm2: Optional[RationalText] = None
    t: List[float] = Field(default_factory=list)
    d: Optional[int] = Field(None, ge=1)
    k: Optional[int] = Field(None, ge=0)
    zeros: bool = False
    format: OutputFormat = OutputFormat.JSON
    enum_cap: Optional[int] = Field(None, gt=0)
    threads: Optional[int] = Field(None, gt=0)
    catalog_list: bool = False
    catalog_emit: Optional[str] = None
    catalog_check: Optional[str] = None
