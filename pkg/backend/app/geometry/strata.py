"""
Singular strata of flat orbifolds, computed on the torus cover R^d / Z^d.

Fixed sets of group elements are finite unions of affine subtori, found by
solving (I - g) x = a (mod 1) with the Smith normal form. Their intersection
closure gives every isotropy stratum closure; removing lower-dimensional
pieces with strictly larger isotropy gives the open strata upstairs, and
identifying those under the holonomy action gives the strata downstairs.

Positive-dimensional strata of dimension >= 2 are not cut further; a warning
is logged when a codimension-one cut would be needed.
"""
import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from app.geometry.crystal import (
    AffineElement,
    CrystalGroup,
    EigenvalueType,
    RationalVector,
    eigenvalue_type,
    reduce_mod1,
)
from app.geometry.exact_linalg import QMatrix, ZMatrix, dot, integer_kernel, snf
from app.services.logger import app_logger
from app.utils.parallel import ordered_map


IntVector = Tuple[int, ...]


def _is_integral(values: Sequence[Fraction]) -> bool:
    return all(Fraction(v).denominator == 1 for v in values)


@dataclass(frozen=True)
class Subtorus:
    """{base + K t : t in R^k} mod Z^d with K a saturated integer basis."""
    base: RationalVector
    directions: Tuple[IntVector, ...]

    @property
    def d(self) -> int:
        return len(self.base)

    @property
    def dim(self) -> int:
        return len(self.directions)

    @cached_property
    def annihilator(self) -> Tuple[IntVector, ...]:
        """Rows spanning the integer vectors orthogonal to every direction."""
        if not self.directions:
            return tuple(tuple(int(i == j) for j in range(self.d)) for i in range(self.d))
        return tuple(integer_kernel(ZMatrix(self.directions)))

    def _offset_integral(self, point: Sequence[Fraction]) -> bool:
        diff = [p - b for p, b in zip(point, self.base)]
        return all(Fraction(dot(row, diff)).denominator == 1 for row in self.annihilator)

    def contains_point(self, point: Sequence[Fraction]) -> bool:
        return self._offset_integral(point)

    def contains(self, other: "Subtorus") -> bool:
        if other.dim > self.dim:
            return False
        for row in self.annihilator:
            if any(dot(row, k) != 0 for k in other.directions):
                return False
        return self._offset_integral(other.base)

    def same_as(self, other: "Subtorus") -> bool:
        return self.dim == other.dim and self.contains(other)

    def intersect(self, other: "Subtorus") -> List["Subtorus"]:
        rows = list(self.annihilator) + list(other.annihilator)
        rhs = [dot(r, self.base) for r in self.annihilator] + [dot(r, other.base) for r in other.annihilator]
        return solve_congruence(ZMatrix(rows), rhs)

    def image(self, element: AffineElement) -> "Subtorus":
        directions = tuple(element.g @ k for k in self.directions)
        return Subtorus(reduce_mod1(element.apply(self.base)), directions)

    def volume_squared(self, G: QMatrix) -> Fraction:
        if not self.directions:
            return Fraction(1)
        K = QMatrix([list(col) for col in zip(*self.directions)])
        return (K.T @ G @ K).det()

    @cached_property
    def _unit_dual(self) -> IntVector:
        """u with u . b = 1 for the single direction b of a circle."""
        (b,) = self.directions
        decomposition = snf(ZMatrix([b]))
        sign = decomposition.U_inv[0, 0]
        return tuple(sign * x for x in decomposition.V_inv.cols[0])

    def parameter(self, point: Sequence[Fraction]) -> Fraction:
        """Position t in [0, 1) of a point on a circle: point = base + t b mod 1."""
        diff = [p - b for p, b in zip(point, self.base)]
        return Fraction(dot(self._unit_dual, diff)) % 1

    def at(self, t: Fraction) -> RationalVector:
        (b,) = self.directions
        return reduce_mod1([x + t * y for x, y in zip(self.base, b)])


def solve_congruence(A: ZMatrix, c: Sequence[Fraction]) -> List[Subtorus]:
    """
    Connected components of {x in R^n : A x = c (mod Z^m)} on the torus.

    With A = U D V and y = V x the system becomes d_i y_i = (U^-1 c)_i, so the
    solvable systems have prod(d_i != 0) components, each a translate of the
    subtorus spanned by the columns of V^-1 beyond the rank.
    """
    decomposition = snf(A)
    rows, cols = A.shape
    rank = decomposition.rank
    b = decomposition.U_inv @ tuple(Fraction(x) for x in c)
    if not _is_integral(b[rank:rows]):
        return []

    V_inv = decomposition.V_inv
    directions = tuple(tuple(col) for col in V_inv.cols[rank:cols])
    diagonal = decomposition.diagonal[:rank]

    components = []
    for combo in itertools.product(*(range(di) for di in diagonal)):
        y = [(b[i] + combo[i]) / diagonal[i] for i in range(rank)] + [Fraction(0)] * (cols - rank)
        components.append(Subtorus(reduce_mod1(V_inv @ tuple(y)), directions))
    return components


@dataclass(frozen=True)
class FixedComponent:
    """One connected component of the fixed set of an affine element."""
    element: AffineElement
    subtorus: Subtorus
    volume_squared: Fraction

    @property
    def base_point(self) -> RationalVector:
        return self.subtorus.base

    @property
    def kernel_basis(self) -> Tuple[IntVector, ...]:
        return self.subtorus.directions

    @property
    def dim(self) -> int:
        return self.subtorus.dim

    @property
    def volume(self) -> float:
        return math.sqrt(self.volume_squared)


def fixed_set(group: CrystalGroup, element: AffineElement) -> List[FixedComponent]:
    """Components of Fix(x -> g x + a) on the torus; empty when a is not in the image."""
    d = element.d
    A = ZMatrix.identity(d) - element.g
    return [
        FixedComponent(element, torus, torus.volume_squared(group.L.G))
        for torus in solve_congruence(A, element.a)
    ]


@dataclass(frozen=True)
class _Piece:
    candidate: int
    interval: Optional[Tuple[Fraction, Fraction]] = None  # circle arcs only


@dataclass(frozen=True)
class Stratum:
    """One singular stratum of the orbifold."""
    d: int
    dim: int
    volume_squared: Fraction
    isotropy: Tuple[AffineElement, ...]
    iso_max: Tuple[AffineElement, ...]
    component_count_upstairs: int
    representative: Subtorus
    adjacent_primary: Optional[int] = None

    @property
    def codim(self) -> int:
        return self.d - self.dim

    @property
    def volume(self) -> float:
        return math.sqrt(self.volume_squared)

    @property
    def isotropy_order(self) -> int:
        return len(self.isotropy)

    @property
    def is_primary(self) -> bool:
        return bool(self.iso_max)

    @property
    def iso_max_types(self) -> Tuple[EigenvalueType, ...]:
        return tuple(eigenvalue_type(e.g) for e in self.iso_max)

    def to_dict(self) -> Dict:
        report = {
            "dim": self.dim,
            "codim": self.codim,
            "volume": self.volume,
            "volume_squared": self.volume_squared,
            "isotropy_order": self.isotropy_order,
            "primary": self.is_primary,
            "iso_max_types": [t.to_dict() for t in self.iso_max_types],
            "component_count_upstairs": self.component_count_upstairs,
            "representative": {
                "base_point": list(self.representative.base),
                "directions": [list(k) for k in self.representative.directions],
            },
        }
        if self.adjacent_primary is not None:
            report["adjacent_primary"] = self.adjacent_primary
        return report


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


class StrataBuilder:
    """Assembles strata for one group; see `strata()`."""

    def __init__(self, group: CrystalGroup, threads: Optional[int] = None):
        self.group = group
        self.threads = threads
        self.G = group.L.G
        self.fixed: List[List[FixedComponent]] = []
        self.candidates: List[Subtorus] = []
        self.isotropy: List[Tuple[int, ...]] = []

    def _find_candidate(self, torus: Subtorus) -> Optional[int]:
        for i, c in enumerate(self.candidates):
            if c.same_as(torus):
                return i
        return None

    def _close_under_intersection(self) -> None:
        for components in self.fixed:
            for comp in components:
                if self._find_candidate(comp.subtorus) is None:
                    self.candidates.append(comp.subtorus)
        i = 0
        while i < len(self.candidates):
            for j in range(i):
                for piece in self.candidates[i].intersect(self.candidates[j]):
                    if self._find_candidate(piece) is None:
                        self.candidates.append(piece)
            i += 1

    def _pointwise_stabilizer(self, torus: Subtorus) -> Tuple[int, ...]:
        members = [0]
        for index, components in enumerate(self.fixed):
            if index == 0:
                continue
            if any(comp.subtorus.contains(torus) for comp in components):
                members.append(index)
        return tuple(members)

    def build(self) -> List[Stratum]:
        group = self.group
        elements = group.elements
        self.fixed = [[]] + ordered_map(lambda e: fixed_set(group, e), elements[1:], self.threads)
        self._close_under_intersection()
        self.isotropy = [self._pointwise_stabilizer(c) for c in self.candidates]

        n = len(self.candidates)
        inside = [[j for j in range(n) if j != i and self.candidates[i].contains(self.candidates[j])] for i in range(n)]

        essential = []
        for i in range(n):
            larger_same = any(
                i in inside[j] and self.isotropy[j] == self.isotropy[i] for j in range(n)
            )
            if not larger_same:
                essential.append(i)
        cuts = {
            i: [j for j in inside[i] if set(self.isotropy[j]) > set(self.isotropy[i])]
            for i in essential
        }

        pieces, piece_volume2 = self._pieces(essential, cuts)
        union = _UnionFind(len(pieces))
        index_of = {piece: k for k, piece in enumerate(pieces)}
        for k, piece in enumerate(pieces):
            for element in elements[1:]:
                image = self._image_piece(piece, element, cuts)
                if image is not None and image in index_of:
                    union.union(k, index_of[image])

        orbits: Dict[int, List[int]] = {}
        for k in range(len(pieces)):
            orbits.setdefault(union.find(k), []).append(k)

        result = []
        for root in sorted(orbits):
            members = orbits[root]
            rep = pieces[members[0]]
            candidate = self.candidates[rep.candidate]
            isotropy = tuple(elements[i] for i in self.isotropy[rep.candidate])
            factor = Fraction(len(members) * len(isotropy), group.order)
            iso_max = tuple(
                e for e in isotropy
                if not e.is_identity and eigenvalue_type(e.g).fixed_dim == candidate.dim
            )
            result.append(Stratum(
                d=group.d,
                dim=candidate.dim,
                volume_squared=factor ** 2 * piece_volume2[members[0]],
                isotropy=isotropy,
                iso_max=iso_max,
                component_count_upstairs=len(members),
                representative=self._representative(rep),
            ))

        result = self._with_adjacency(result, pieces, orbits, cuts)
        result.sort(key=lambda s: (s.dim, -s.isotropy_order, s.representative.base, s.representative.directions))
        app_logger.info(
            f"Found {len(result)} strata for '{group.name or 'group'}' "
            f"from {len(self.candidates)} fixed subtori"
        )
        return result

    def _pieces(self, essential: List[int], cuts: Dict[int, List[int]]):
        pieces: List[_Piece] = []
        volume2: List[Fraction] = []
        for i in essential:
            torus = self.candidates[i]
            full = torus.volume_squared(self.G)
            if torus.dim == 1 and cuts[i]:
                params = sorted({torus.parameter(self.candidates[j].base) for j in cuts[i]})
                bounds = params + [params[0] + 1]
                for lo, hi in zip(bounds, bounds[1:]):
                    pieces.append(_Piece(i, (lo, hi)))
                    volume2.append((hi - lo) ** 2 * full)
                continue
            if torus.dim >= 2 and any(self.candidates[j].dim == torus.dim - 1 for j in cuts[i]):
                app_logger.warning(
                    f"Stratum of dimension {torus.dim} is cut by codimension-one subtori; "
                    "it is reported as a single piece"
                )
            pieces.append(_Piece(i))
            volume2.append(full)
        return pieces, volume2

    def _locate(self, candidate: int, point: RationalVector, cuts: Dict[int, List[int]]) -> Optional[_Piece]:
        torus = self.candidates[candidate]
        if torus.dim != 1 or not cuts.get(candidate):
            return _Piece(candidate)
        t = torus.parameter(point)
        params = sorted({torus.parameter(self.candidates[j].base) for j in cuts[candidate]})
        bounds = params + [params[0] + 1]
        for lo, hi in zip(bounds, bounds[1:]):
            s = t if t >= lo else t + 1
            if lo < s < hi:
                return _Piece(candidate, (lo, hi))
        return None

    def _sample(self, piece: _Piece) -> RationalVector:
        torus = self.candidates[piece.candidate]
        if piece.interval is None:
            return torus.base
        lo, hi = piece.interval
        return torus.at((lo + hi) / 2)

    def _image_piece(self, piece: _Piece, element: AffineElement, cuts) -> Optional[_Piece]:
        image = self.candidates[piece.candidate].image(element)
        target = self._find_candidate(image)
        if target is None or target not in cuts:
            return None
        point = reduce_mod1(element.apply(self._sample(piece)))
        return self._locate(target, point, cuts)

    def _representative(self, piece: _Piece) -> Subtorus:
        torus = self.candidates[piece.candidate]
        if piece.interval is None:
            return torus
        return Subtorus(torus.at(piece.interval[0]), torus.directions)

    def _with_adjacency(self, result, pieces, orbits, cuts) -> List[Stratum]:
        """Attach, to each non-primary stratum, the number of primary strata touching it."""
        roots = sorted(orbits)
        stratum_of_piece = {}
        for position, root in enumerate(roots):
            for k in orbits[root]:
                stratum_of_piece[k] = position

        updated = []
        for position, stratum in enumerate(result):
            if stratum.is_primary:
                updated.append(stratum)
                continue
            candidate = pieces[orbits[roots[position]][0]].candidate
            core = self.candidates[candidate]
            touching = set()
            for k, piece in enumerate(pieces):
                other = stratum_of_piece[k]
                if other == position or not result[other].is_primary:
                    continue
                host = self.candidates[piece.candidate]
                if not host.contains(core) or host.same_as(core):
                    continue
                if piece.interval is not None:
                    t = host.parameter(core.base)
                    if core.dim != 0 or t not in (piece.interval[0], piece.interval[1] % 1):
                        continue
                touching.add(other)
            updated.append(replace(stratum, adjacent_primary=len(touching)))
        return updated


def strata(group: CrystalGroup, threads: Optional[int] = None) -> List[Stratum]:
    """All singular strata of the orbifold, sorted by (dim, -isotropy order, position)."""
    if group.order == 1:
        return []
    return StrataBuilder(group, threads).build()


def primary_filter(items: Sequence[Stratum]) -> List[Stratum]:
    return [s for s in items if s.is_primary]
