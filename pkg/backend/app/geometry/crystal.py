"""
Crystallographic groups in lattice coordinates.

A group element x -> g x + a is stored as an integer matrix g (its action on
the translation lattice) and a rational translation a reduced mod 1. The
metric enters only through the Gram matrix, so orthogonality is the exact
relation g^T G g = G and the hexagonal examples never need sqrt(3).
"""
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from app.config import settings
from app.core.exceptions import (
    InconsistentTranslation,
    NonInvertible,
    NotFiniteOrder,
    NotOrthogonal,
    OrderCapExceeded,
    ValidationError,
)
from app.geometry.exact_linalg import ZMatrix, char_poly, poly_divmod, poly_eval, to_fraction
from app.geometry.lattice import LatticeGram
from app.services.logger import app_logger


RationalVector = Tuple[Fraction, ...]


def reduce_mod1(a: Sequence) -> RationalVector:
    return tuple(to_fraction(x) % 1 for x in a)


@dataclass(frozen=True)
class AffineElement:
    """x -> g x + a, with a taken mod 1 in lattice coordinates."""
    g: ZMatrix
    a: RationalVector

    def __post_init__(self):
        if not self.g.is_square:
            raise ValidationError("Point-group matrix must be square")
        if len(self.a) != self.g.shape[0]:
            raise ValidationError(
                f"Translation has {len(self.a)} entries, matrix is {self.g.shape[0]}x{self.g.shape[0]}"
            )
        object.__setattr__(self, "a", reduce_mod1(self.a))

    @classmethod
    def identity(cls, d: int) -> "AffineElement":
        return cls(ZMatrix.identity(d), (Fraction(0),) * d)

    @classmethod
    def of(cls, matrix: Sequence[Sequence[int]], translation: Optional[Sequence] = None) -> "AffineElement":
        g = ZMatrix(matrix)
        return cls(g, tuple(translation) if translation is not None else (Fraction(0),) * g.shape[0])

    @property
    def d(self) -> int:
        return self.g.shape[0]

    @property
    def is_identity(self) -> bool:
        return self.g == ZMatrix.identity(self.d) and not any(self.a)

    def compose(self, other: "AffineElement") -> "AffineElement":
        """(g1, a1) . (g2, a2) = (g1 g2, g1 a2 + a1 mod 1)."""
        ga = self.g @ other.a
        return AffineElement(self.g @ other.g, tuple(x + y for x, y in zip(ga, self.a)))

    def apply(self, x: Sequence[Fraction]) -> RationalVector:
        """Image of a point, not reduced."""
        gx = self.g @ tuple(x)
        return tuple(u + v for u, v in zip(gx, self.a))


@dataclass(frozen=True)
class CrystalGroup:
    """A lattice plus one affine element per holonomy matrix, identity first."""
    L: LatticeGram
    elements: Tuple[AffineElement, ...]
    name: str = ""

    @property
    def d(self) -> int:
        return self.L.d

    @property
    def order(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class EigenvalueType:
    """
    E(theta_1 ... theta_s; r) of a finite-order orthogonal map.

    `turns` holds the exact angles as fractions of a full turn; `thetas` are
    the same angles in radians.
    """
    d: int
    turns: Tuple[Fraction, ...]
    r: int
    fixed_dim: int

    @property
    def s(self) -> int:
        return len(self.turns)

    @property
    def thetas(self) -> Tuple[float, ...]:
        return tuple(2 * math.pi * float(t) for t in self.turns)

    @property
    def codim(self) -> int:
        return self.d - self.fixed_dim

    def label(self) -> str:
        angles = ", ".join(_angle_label(t) for t in self.turns)
        r = str(self.r) if self.r else ""
        return f"E({angles};{r})"

    def to_dict(self) -> Dict:
        return {
            "label": self.label(),
            "s": self.s,
            "turns": list(self.turns),
            "thetas": list(self.thetas),
            "r": self.r,
            "fixed_dim": self.fixed_dim,
        }


def _angle_label(turn: Fraction) -> str:
    half = turn * 2  # angle / pi
    if half.numerator == 1:
        return f"π/{half.denominator}"
    return f"{half.numerator}π/{half.denominator}"


def _check_generator(L: LatticeGram, element: AffineElement, index: int) -> None:
    g = element.g
    if g.shape[0] != L.d:
        raise ValidationError(
            f"Generator {index} is {g.shape[0]}x{g.shape[0]}, lattice dimension is {L.d}",
            context={"generator": index}
        )
    if abs(g.det()) != 1:
        raise NonInvertible(
            f"Generator {index} has det {g.det()}, expected ±1",
            context={"generator": index}
        )
    if g.T @ L.G @ g != L.G:
        raise NotOrthogonal(
            f"Generator {index} does not preserve the Gram matrix (g^T G g != G)",
            context={"generator": index, "matrix": [list(r) for r in g.rows]}
        )


def build_group(
    L: LatticeGram,
    generators: Sequence[AffineElement],
    order_cap: Optional[int] = None,
    name: str = ""
) -> CrystalGroup:
    """
    Close generators under composition and validate the result.

    Args:
        L: Translation lattice
        generators: Affine generators; empty gives the torus
        order_cap: Maximum holonomy order (defaults to settings.ORDER_CAP)
        name: Optional label carried into reports

    Returns:
        CrystalGroup with the identity first, remaining elements in discovery order

    Raises:
        NonInvertible, NotOrthogonal, InconsistentTranslation, OrderCapExceeded
    """
    order_cap = order_cap if order_cap is not None else settings.ORDER_CAP
    for index, element in enumerate(generators):
        _check_generator(L, element, index)

    identity = AffineElement.identity(L.d)
    found: Dict[ZMatrix, AffineElement] = {identity.g: identity}
    order: List[AffineElement] = [identity]
    queue = deque([identity])

    while queue:
        current = queue.popleft()
        for generator in generators:
            product = current.compose(generator)
            known = found.get(product.g)
            if known is not None:
                if known.a != product.a:
                    raise InconsistentTranslation(
                        "The same holonomy matrix occurs with translations "
                        f"{[str(x) for x in known.a]} and {[str(x) for x in product.a]}; "
                        "the lattice is not the full translation subgroup",
                        context={"matrix": [list(r) for r in product.g.rows]}
                    )
                continue
            if len(order) >= order_cap:
                raise OrderCapExceeded(
                    f"Holonomy group exceeds the order cap {order_cap}",
                    context={"order_cap": order_cap}
                )
            found[product.g] = product
            order.append(product)
            queue.append(product)

    app_logger.debug(f"Built group '{name or 'unnamed'}' with |F| = {len(order)} in dimension {L.d}")
    return CrystalGroup(L=L, elements=tuple(order), name=name)


def tr_p(g: ZMatrix, p: int) -> int:
    """Trace of the induced action on the p-th exterior power."""
    d = g.shape[0]
    if not 0 <= p <= d:
        raise ValidationError(f"Degree p = {p} outside 0..{d}")
    return (-1) ** p * char_poly(g)[p]


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> Tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, highest degree first."""
    poly = [1] + [0] * (n - 1) + [-1]
    for k in range(1, n):
        if n % k == 0:
            quotient, remainder = poly_divmod(poly, cyclotomic(k))
            poly = [int(c) for c in quotient]
    return tuple(poly)


def _divide_out(poly: List[int], factor: Sequence[int]) -> Optional[List[int]]:
    quotient, remainder = poly_divmod(poly, factor)
    if any(remainder) or any(c.denominator != 1 for c in quotient):
        return None
    return [int(c) for c in quotient]


def _euler_phi(n: int) -> int:
    return sum(1 for j in range(1, n + 1) if math.gcd(j, n) == 1)


def eigenvalue_type(g: ZMatrix) -> EigenvalueType:
    """
    Eigenvalue type read off the exact cyclotomic factorization of char_poly(g).

    Raises:
        NotFiniteOrder: if g is not diagonalizable with roots of unity as eigenvalues
    """
    d = g.shape[0]
    identity = ZMatrix.identity(d)
    fixed_dim = d - (g - identity).rank()
    r = d - (g + identity).rank()

    poly = list(char_poly(g))
    for factor, count in (((1, -1), fixed_dim), ((1, 1), r)):
        for _ in range(count):
            poly = _divide_out(poly, factor)
            if poly is None:
                raise NotFiniteOrder(f"Matrix {g} is not of finite order")
    if poly_eval(poly, 1) == 0 or poly_eval(poly, -1) == 0:
        raise NotFiniteOrder(f"Matrix {g} has a nontrivial Jordan block")

    turns: List[Fraction] = []
    n = 3
    while len(poly) > 1:
        if _euler_phi(n) > len(poly) - 1:
            # phi(n) >= sqrt(n / 2), so past 2 d^2 nothing can divide
            if n > 2 * d * d + 2:
                raise NotFiniteOrder(f"Matrix {g} is not of finite order")
            n += 1
            continue
        reduced = _divide_out(poly, cyclotomic(n))
        if reduced is None:
            n += 1
            continue
        poly = reduced
        turns.extend(Fraction(j, n) for j in range(1, (n + 1) // 2) if math.gcd(j, n) == 1)

    return EigenvalueType(d=d, turns=tuple(sorted(turns)), r=r, fixed_dim=fixed_dim)


def det_normal_factor(g: ZMatrix) -> Fraction:
    """
    |det(I - A)| for A the restriction of g to the orthogonal complement of its
    fixed space, computed as |q(1)| where char_poly(g) = (x - 1)^f q(x).
    """
    d = g.shape[0]
    fixed_dim = d - (g - ZMatrix.identity(d)).rank()
    poly = list(char_poly(g))
    for _ in range(fixed_dim):
        poly = _divide_out(poly, (1, -1))
        if poly is None:
            raise NotFiniteOrder(f"Matrix {g} is not of finite order")
    return Fraction(abs(poly_eval(poly, 1)))


def element_order(g: ZMatrix, cap: int = 10_000) -> int:
    identity = ZMatrix.identity(g.shape[0])
    power = g
    for k in range(1, cap + 1):
        if power == identity:
            return k
        power = power @ g
    raise NotFiniteOrder(f"Matrix {g} has order above {cap}")
