"""
Bit-exact output helpers.

Exact values are written as "p/q" strings ("p" when q == 1). Floats go out as
JSON numbers through repr, which is the shortest string that reads back to
the same double.
"""
import csv
import io
import json
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping


def rational_str(value) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def jsonable(obj: Any) -> Any:
    """Recursively convert Fractions, tuples, enums and pydantic models."""
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"Non-finite float {obj!r} cannot be serialized")
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if hasattr(obj, "model_dump"):
        return jsonable(obj.model_dump())
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON: stable key order from the producer, two-space indent."""
    return json.dumps(jsonable(obj), indent=2, ensure_ascii=False, allow_nan=False)


def spectrum_csv(entries: Iterable[Mapping[str, Any]]) -> str:
    """CSV with header mu2,multiplicity."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["mu2", "multiplicity"])
    for entry in entries:
        writer.writerow([jsonable(entry["mu2"]), entry["multiplicity"]])
    return buffer.getvalue()
