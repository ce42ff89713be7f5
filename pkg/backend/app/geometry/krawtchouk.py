"""
Binary Krawtchouk polynomials.

K_p^d(k) is the trace on p-forms of a reflection with k eigenvalues -1 in
dimension d, so its integer zeros are exactly the codimensions whose strata
the p-spectrum cannot see.
"""
import math
from typing import Dict, List, Tuple

from app.core.exceptions import ValidationError
from app.geometry.crystal import tr_p
from app.geometry.exact_linalg import ZMatrix


def binom(n: int, k: int) -> int:
    """C(n, k), zero when k < 0 or k > n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def _check(d: int, p: int, k: int) -> None:
    if d < 1:
        raise ValidationError(f"Dimension must be at least 1, got {d}")
    if not 0 <= p <= d:
        raise ValidationError(f"Degree p = {p} outside 0..{d}")
    if not 0 <= k <= d:
        raise ValidationError(f"Argument k = {k} outside 0..{d}")


def krawtchouk(d: int, p: int, k: int) -> int:
    """K_p^d(k) = sum_j (-1)^j C(k, j) C(d - k, p - j)."""
    _check(d, p, k)
    return sum((-1) ** j * binom(k, j) * binom(d - k, p - j) for j in range(p + 1))


def integer_zeros(d: int, p: int) -> List[int]:
    _check(d, p, 0)
    return [k for k in range(d + 1) if krawtchouk(d, p, k) == 0]


def reflection(d: int, k: int) -> ZMatrix:
    """diag(-1 x k, 1 x (d - k))."""
    return ZMatrix.diagonal([-1] * k + [1] * (d - k))


def reflection_trace_check(d: int, k: int, p: int) -> Tuple[int, int]:
    """(tr_p of the codim-k reflection, K_p^d(k)); the two must agree."""
    _check(d, p, k)
    return tr_p(reflection(d, k), p), krawtchouk(d, p, k)


def blind_degrees(d: int) -> Dict[int, List[int]]:
    """For each odd codimension k, the degrees p whose spectra miss codim-k singular volume."""
    return {
        k: [p for p in range(d + 1) if krawtchouk(d, p, k) == 0]
        for k in range(1, d + 1, 2)
    }
