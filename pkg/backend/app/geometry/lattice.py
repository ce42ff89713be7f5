"""
Rational-Gram lattices and exact dual-vector enumeration.

Coordinates are always taken in a fixed basis of the translation lattice, so
the lattice itself is Z^d and the metric lives entirely in the Gram matrix G.
Dual vectors are integer coordinate vectors v with squared norm v^T G^-1 v.
"""
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from app.config import settings
from app.core.exceptions import BudgetExceeded, NotPositiveDefinite
from app.geometry.exact_linalg import QMatrix, inverse, ldl, to_fraction
from app.services.logger import app_logger
from app.utils.parallel import ordered_map


IntVector = Tuple[int, ...]


@dataclass(frozen=True)
class LatticeGram:
    """A lattice given by its Gram matrix in a fixed basis."""
    G: QMatrix

    def __post_init__(self):
        if not self.G.is_square:
            raise NotPositiveDefinite("Gram matrix must be square")
        if not self.G.is_symmetric:
            raise NotPositiveDefinite("Gram matrix must be symmetric")
        # raises NotPositiveDefinite on the first non-positive leading minor
        ldl(self.G)

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence]) -> "LatticeGram":
        return cls(QMatrix([[to_fraction(x) for x in row] for row in entries]))

    @classmethod
    def standard(cls, d: int) -> "LatticeGram":
        return cls(QMatrix.identity(d))

    @property
    def d(self) -> int:
        return self.G.shape[0]

    @cached_property
    def det(self) -> Fraction:
        return self.G.det()

    @cached_property
    def dual(self) -> QMatrix:
        return inverse(self.G)


@dataclass(frozen=True)
class DualShellTable:
    """
    Integer vectors grouped by exact squared norm, complete up to `bound`.

    Keys are sorted ascending; vectors inside a shell are sorted
    lexicographically.
    """
    bound: Fraction
    shells: Dict[Fraction, Tuple[IntVector, ...]] = field(default_factory=dict)

    @property
    def keys(self) -> List[Fraction]:
        return list(self.shells.keys())

    @property
    def vector_count(self) -> int:
        return sum(len(v) for v in self.shells.values())

    def restrict(self, bound: Fraction) -> "DualShellTable":
        return DualShellTable(bound, {k: v for k, v in self.shells.items() if k <= bound})

    def summary(self) -> List[Dict]:
        return [{"mu2": k, "count": len(v)} for k, v in self.shells.items()]


def dual_gram(L: LatticeGram) -> QMatrix:
    """G* = G^-1, the Gram matrix of the dual lattice in the dual basis."""
    return L.dual


def covolume(L: LatticeGram) -> float:
    """sqrt(det G); the exact determinant is L.det."""
    return math.sqrt(L.det)


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def predicted_count(Q: QMatrix, bound: Fraction) -> float:
    """Volume estimate of #{v : v^T Q v <= bound}, used for the budget gate."""
    n = Q.shape[0]
    slack = 0.5 * math.sqrt(max(float(Q[i, i]) for i in range(n)))
    radius = math.sqrt(float(bound)) + slack
    return _unit_ball_volume(n) * radius ** n / math.sqrt(float(Q.det()))


def count_majorant(Q: QMatrix, bound: float) -> float:
    """
    Rigorous upper bound on #{v : v^T Q v <= bound}.

    Translates of the half-open basis cell around each counted point are
    disjoint, have volume sqrt(det Q) and lie in the ball of radius
    sqrt(bound) + rho with rho = sum_i sqrt(Q_ii) / 2.
    """
    n = Q.shape[0]
    rho = 0.5 * sum(math.sqrt(float(Q[i, i])) for i in range(n))
    radius = math.sqrt(max(bound, 0.0)) + rho
    return _unit_ball_volume(n) * radius ** n / math.sqrt(float(Q.det()))


class _Enumerator:
    """Fincke-Pohst enumeration of an integer quadratic form."""

    def __init__(self, Q: QMatrix, bound: Fraction, cap: int):
        self.n = Q.shape[0]
        self.scale = math.lcm(*(x.denominator for row in Q.rows for x in row))
        self.Qi = [[int(x * self.scale) for x in row] for row in Q.rows]
        self.limit = bound * self.scale
        L, D = ldl(Q.scale(self.scale))
        self.Lf = [[float(x) for x in row] for row in L.rows]
        self.Df = [float(x) for x in D]
        self.budget = float(self.limit)
        # float pruning is widened by eps; the exact integer test decides membership
        self.eps = 1e-9 * (1.0 + self.budget)
        self.cap = cap
        self._count = 0
        self._lock = threading.Lock()

    def _norm(self, v: IntVector) -> int:
        n = self.n
        total = 0
        for i in range(n):
            vi = v[i]
            if vi:
                row = self.Qi[i]
                total += vi * sum(row[j] * v[j] for j in range(n))
        return total

    def _range(self, i: int, x: List[int], remaining: float) -> Tuple[range, float]:
        center = -sum(self.Lf[j][i] * x[j] for j in range(i + 1, self.n))
        radius = math.sqrt(max(remaining + self.eps, 0.0) / self.Df[i])
        return range(math.ceil(center - radius), math.floor(center + radius) + 1), center

    def top_range(self) -> range:
        x = [0] * self.n
        span, _ = self._range(self.n - 1, x, self.budget)
        return span

    def run(self, top_value: int) -> List[Tuple[int, IntVector]]:
        n = self.n
        x = [0] * n
        out: List[Tuple[int, IntVector]] = []
        top = n - 1
        center = 0.0
        remaining = self.budget - self.Df[top] * (top_value - center) ** 2
        if remaining < -self.eps:
            return out
        x[top] = top_value

        def descend(i: int, remaining: float) -> None:
            if i < 0:
                v = tuple(x)
                q = self._norm(v)
                if q <= self.limit:
                    out.append((q, v))
                return
            span, center = self._range(i, x, remaining)
            for xi in span:
                rem = remaining - self.Df[i] * (xi - center) ** 2
                if rem < -self.eps:
                    continue
                x[i] = xi
                descend(i - 1, rem)
            x[i] = 0

        descend(top - 1, remaining)
        with self._lock:
            self._count += len(out)
            if self._count > self.cap:
                raise BudgetExceeded(
                    f"Enumeration produced more than {self.cap} vectors",
                    context={"cap": self.cap}
                )
        return out


def enumerate_form(
    Q: QMatrix,
    bound,
    cap: Optional[int] = None,
    threads: Optional[int] = None
) -> DualShellTable:
    """
    All integer vectors v with v^T Q v <= bound, grouped by exact value.

    The outermost coordinate range is split across workers and the pieces are
    merged by exact key, so the table is identical to a serial run.

    Args:
        Q: Symmetric positive definite rational matrix
        bound: Non-negative rational bound
        cap: Maximum number of vectors (defaults to settings.ENUMERATION_CAP)
        threads: Worker count

    Raises:
        BudgetExceeded: if the predicted or actual count exceeds cap
    """
    bound = to_fraction(bound)
    cap = cap if cap is not None else settings.ENUMERATION_CAP
    if bound < 0:
        return DualShellTable(bound, {})

    predicted = predicted_count(Q, bound)
    if predicted > cap:
        raise BudgetExceeded(
            f"Predicted {predicted:.3g} vectors up to norm^2 {bound}, cap is {cap}",
            context={"predicted": predicted, "cap": cap, "bound": str(bound)}
        )

    enumerator = _Enumerator(Q, bound, cap)
    chunks = ordered_map(enumerator.run, list(enumerator.top_range()), threads)

    grouped: Dict[int, List[IntVector]] = {}
    for chunk in chunks:
        for q, v in chunk:
            grouped.setdefault(q, []).append(v)

    shells = {
        Fraction(q, enumerator.scale): tuple(sorted(grouped[q]))
        for q in sorted(grouped)
    }
    app_logger.debug(
        f"Enumerated {sum(len(v) for v in shells.values())} vectors in {len(shells)} shells "
        f"(bound {bound}, predicted {predicted:.0f})"
    )
    return DualShellTable(bound, shells)


def enumerate_shells(
    L: LatticeGram,
    bound,
    cap: Optional[int] = None,
    threads: Optional[int] = None
) -> DualShellTable:
    """Dual lattice vectors grouped by squared norm mu^2 = v^T G* v up to bound."""
    return enumerate_form(dual_gram(L), bound, cap=cap, threads=threads)
