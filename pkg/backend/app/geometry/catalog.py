"""
Catalog of named example groups with machine-checkable expectations.

Names:
    torus<d>                    Z^d with trivial holonomy
    O<k>-d<d>, M<k>-d<d>        the codim-k involution orbifold and its
                                fixed-point-free partner (translation e_d / 2)
    triangular-orbifold         order-3 rotation on the hexagonal prism lattice
    triangular-manifold         the same rotation composed with a 1/3 screw
    pillow, square              Z^2 by the rotation group C4 and by the Klein four
                                reflection group
    p222                        Z^3 by the three half-turns about the axes
"""
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from app.core.exceptions import InvalidCodim, OrbispecException, ValidationError
from app.geometry.crystal import AffineElement, CrystalGroup, build_group
from app.geometry.heat import parity_invariants, singular_volume_from_B
from app.geometry.krawtchouk import krawtchouk, reflection
from app.geometry.lattice import LatticeGram
from app.geometry.spectrum import isospectral_compare, spectrum_table
from app.geometry.strata import Stratum, strata as compute_strata
from app.services.logger import app_logger


@dataclass(frozen=True)
class Claim:
    """One expectation about an entry; `kind` selects the checker."""
    kind: str
    description: str
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "description": self.description, "params": self.params}


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    group: CrystalGroup
    description: str = ""
    claims: Tuple[Claim, ...] = ()

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "description": self.description,
            "dimension": self.group.d,
            "order": self.group.order,
            "claims": [c.to_dict() for c in self.claims],
        }


@dataclass(frozen=True)
class ClaimResult:
    claim: Claim
    passed: bool
    detail: str

    def to_dict(self) -> Dict:
        return {"claim": self.claim.to_dict(), "passed": self.passed, "detail": self.detail}


def _entry(name: str, L: LatticeGram, generators, description: str, claims=()) -> CatalogEntry:
    return CatalogEntry(
        name=name,
        group=build_group(L, generators, name=name),
        description=description,
        claims=tuple(claims),
    )


def _isospectral(other: str, degrees, bound) -> Claim:
    return Claim(
        "isospectral",
        f"{other}: equal p-spectra up to mu^2 <= {bound} for p in {list(degrees)}",
        {"other": other, "degrees": list(degrees), "bound": Fraction(bound)},
    )


def _first_difference(other: str, p: int, bound, mu2=None, multiplicities=None) -> Claim:
    params = {"other": other, "p": p, "bound": Fraction(bound)}
    text = f"{other}: {p}-spectra differ up to mu^2 <= {bound}"
    if mu2 is not None:
        params["mu2"] = Fraction(mu2)
        params["multiplicities"] = list(multiplicities)
        text += f", first at mu^2 = {mu2} with multiplicities {tuple(multiplicities)}"
    return Claim("spectra-differ", text, params)


def _strata_claim(expected: List[Dict], description: str) -> Claim:
    """`expected` lists {dim, isotropy_order, volume_squared, primary[, adjacent_primary], count}."""
    return Claim("strata", description, {"expected": expected})


def _parity_claim(p: int, epsilon: str, value) -> Claim:
    return Claim(
        "parity",
        f"B_{epsilon}^{p} = {value}",
        {"p": p, "epsilon": epsilon, "value": Fraction(value)},
    )


def make_torus(d: int) -> CatalogEntry:
    if d < 1:
        raise ValidationError(f"Dimension must be at least 1, got {d}")
    return _entry(
        f"torus{d}",
        LatticeGram.standard(d),
        [],
        f"The flat torus R^{d} / Z^{d}",
        [_strata_claim([], "no singular strata")],
    )


def _half(d: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(0) for _ in range(d - 1)) + (Fraction(1, 2),)


def make_Ok_Mk(d: int, k: int, p: Optional[int] = None) -> Tuple[CatalogEntry, CatalogEntry]:
    """
    O_k = Z^d by x -> gamma_k x and M_k = Z^d by x -> gamma_k x + e_d / 2,
    with gamma_k negating the first k coordinates.

    The pair is p-isospectral exactly when K_p^d(k) = 0; passing a p where
    this fails only logs a warning.

    Raises:
        InvalidCodim: unless 1 <= k < d
    """
    if not 1 <= k < d:
        raise InvalidCodim(f"Codimension k = {k} must satisfy 1 <= k < d = {d}", context={"d": d, "k": k})
    if p is not None and krawtchouk(d, p, k) != 0:
        app_logger.warning(f"K_{p}^{d}({k}) = {krawtchouk(d, p, k)} != 0: O_{k} and M_{k} are not {p}-isospectral")

    g = reflection(d, k)
    blind = [q for q in range(d + 1) if krawtchouk(d, q, k) == 0]
    orbifold_name, manifold_name = f"O{k}-d{d}", f"M{k}-d{d}"

    orbifold_claims = [
        _strata_claim(
            [{"dim": d - k, "isotropy_order": 2, "volume_squared": Fraction(1), "primary": True, "count": 2 ** k}],
            f"{2 ** k} strata of codimension {k}, isotropy order 2, volume 1",
        ),
        _first_difference(manifold_name, 0, 1, 1, (2 * d - k, 2 * d - k - 2)),
    ]
    if blind:
        orbifold_claims.insert(0, _isospectral(manifold_name, blind, 4 if d <= 6 else 2))
    if k % 2 == 1:
        orbifold_claims.append(_parity_claim(0, "-", Fraction(1, 2)))
        orbifold_claims.append(Claim(
            "singular-volume",
            f"singular volume {2 ** k} recovered from B_-^0",
            {"p": 0, "k": k, "volume": Fraction(2 ** k)},
        ))

    orbifold = _entry(
        orbifold_name,
        LatticeGram.standard(d),
        [AffineElement(g, (Fraction(0),) * d)],
        f"Z^{d} by the reflection in {k} coordinates; {2 ** k} singular strata",
        orbifold_claims,
    )
    manifold = _entry(
        manifold_name,
        LatticeGram.standard(d),
        [AffineElement(g, _half(d))],
        f"Z^{d} by the same reflection composed with a half translation along e_{d}; a manifold",
        [_strata_claim([], "no singular strata")],
    )
    return orbifold, manifold


def make_half_dim_pair(d: int) -> Tuple[CatalogEntry, CatalogEntry]:
    """O_{d/2} and M_{d/2}, p-isospectral for every odd p."""
    if d % 2 or d < 2:
        raise InvalidCodim(f"Half-dimensional pairs need an even d >= 2, got {d}", context={"d": d})
    return make_Ok_Mk(d, d // 2, 1)


_HEXAGONAL_GRAM = [[1, Fraction(1, 2), 0], [Fraction(1, 2), 1, 0], [0, 0, 1]]
_ROTATION_120 = [[-1, -1, 0], [1, 0, 0], [0, 0, 1]]


def make_triangular_pair() -> Tuple[CatalogEntry, CatalogEntry]:
    """Hexagonal prism lattice by a 2 pi / 3 rotation, without and with a 1/3 screw."""
    L = LatticeGram.from_entries(_HEXAGONAL_GRAM)
    orbifold = _entry(
        "triangular-orbifold",
        L,
        [AffineElement.of(_ROTATION_120)],
        "Hexagonal prism lattice by the order-3 rotation about e_3; three singular circles",
        [
            _isospectral("triangular-manifold", [1], 4),
            _first_difference("triangular-manifold", 0, 2, 1, (2, 0)),
            _strata_claim(
                [{"dim": 1, "isotropy_order": 3, "volume_squared": Fraction(1), "primary": True, "count": 3}],
                "three circles of isotropy order 3 and length 1",
            ),
        ],
    )
    manifold = _entry(
        "triangular-manifold",
        L,
        [AffineElement.of(_ROTATION_120, [0, 0, Fraction(1, 3)])],
        "The same rotation composed with translation e_3 / 3; a manifold",
        [_strata_claim([], "no singular strata")],
    )
    return orbifold, manifold


def make_pillow_and_square() -> Tuple[CatalogEntry, CatalogEntry]:
    L = LatticeGram.standard(2)
    pillow = _entry(
        "pillow",
        L,
        [AffineElement.of([[0, -1], [1, 0]])],
        "Z^2 by the quarter-turn rotation; a sphere with cone points of orders 4, 4 and 2",
        [
            _isospectral("square", [1], 4),
            _first_difference("square", 0, 1, 1, (1, 2)),
            _strata_claim(
                [
                    {"dim": 0, "isotropy_order": 4, "volume_squared": Fraction(1), "primary": True, "count": 2},
                    {"dim": 0, "isotropy_order": 2, "volume_squared": Fraction(1), "primary": True, "count": 1},
                ],
                "two cone points of order 4 and one of order 2",
            ),
            _parity_claim(0, "+", Fraction(3, 4)),
        ],
    )
    square = _entry(
        "square",
        L,
        [AffineElement.of([[-1, 0], [0, 1]]), AffineElement.of([[1, 0], [0, -1]])],
        "Z^2 by the reflections in both axes; a square with mirror edges",
        [
            _strata_claim(
                [
                    {"dim": 1, "isotropy_order": 2, "volume_squared": Fraction(1, 4), "primary": True, "count": 4},
                    {"dim": 0, "isotropy_order": 4, "volume_squared": Fraction(1), "primary": True, "count": 4},
                ],
                "four mirror edges of length 1/2 and four corners of order 4",
            ),
        ],
    )
    return pillow, square


def make_p222() -> CatalogEntry:
    """Z^3 by the half-turns about the three coordinate axes."""
    return _entry(
        "p222",
        LatticeGram.standard(3),
        [AffineElement.of([[1, 0, 0], [0, -1, 0], [0, 0, -1]]), AffineElement.of([[-1, 0, 0], [0, 1, 0], [0, 0, -1]])],
        "Z^3 by the Klein four group of axis half-turns; rotation arcs meeting at non-primary points",
        [
            _strata_claim(
                [
                    {"dim": 1, "isotropy_order": 2, "volume_squared": Fraction(1, 4), "primary": True, "count": 12},
                    {
                        "dim": 0, "isotropy_order": 4, "volume_squared": Fraction(1), "primary": False,
                        "adjacent_primary": 3, "count": 8,
                    },
                ],
                "12 rotation arcs of length 1/2 and 8 non-primary points, each touching 3 arcs",
            ),
        ],
    )


_FIXED_NAMES: Dict[str, Callable[[], CatalogEntry]] = {
    "triangular-orbifold": lambda: make_triangular_pair()[0],
    "triangular-manifold": lambda: make_triangular_pair()[1],
    "pillow": lambda: make_pillow_and_square()[0],
    "square": lambda: make_pillow_and_square()[1],
    "p222": make_p222,
}

_TORUS = re.compile(r"^torus(\d+)$")
_INVOLUTION = re.compile(r"^([OM])(\d+)-d(\d+)$")

LISTED_NAMES = [
    "torus1", "torus2", "torus3",
    "O1-d2", "M1-d2", "O2-d4", "M2-d4", "O3-d6", "M3-d6",
    "triangular-orbifold", "triangular-manifold",
    "pillow", "square", "p222",
]


def entry_by_name(name: str) -> CatalogEntry:
    """
    Build a catalog entry by name.

    Raises:
        ValidationError: for an unknown name
    """
    if name in _FIXED_NAMES:
        return _FIXED_NAMES[name]()
    match = _TORUS.match(name)
    if match:
        return make_torus(int(match.group(1)))
    match = _INVOLUTION.match(name)
    if match:
        kind, k, d = match.group(1), int(match.group(2)), int(match.group(3))
        pair = make_Ok_Mk(d, k)
        return pair[0] if kind == "O" else pair[1]
    raise ValidationError(f"Unknown catalog entry '{name}'", context={"known": LISTED_NAMES})


def list_entries() -> List[CatalogEntry]:
    return [entry_by_name(name) for name in LISTED_NAMES]


def _strata_signature(items: List[Stratum], with_adjacency: bool) -> Counter:
    signature = Counter()
    for s in items:
        key = (s.dim, s.isotropy_order, s.volume_squared, s.is_primary)
        if with_adjacency:
            key += (s.adjacent_primary,)
        signature[key] += 1
    return signature


class _ClaimChecker:
    """Evaluates the claims of one entry, computing strata at most once."""

    def __init__(self, entry: CatalogEntry, threads: Optional[int] = None):
        self.entry = entry
        self.threads = threads
        self._strata: Optional[List[Stratum]] = None

    @property
    def strata(self) -> List[Stratum]:
        if self._strata is None:
            self._strata = compute_strata(self.entry.group, threads=self.threads)
        return self._strata

    def check(self, claim: Claim) -> ClaimResult:
        handler = getattr(self, "_check_" + claim.kind.replace("-", "_"), None)
        if handler is None:
            return ClaimResult(claim, False, f"no checker for claim kind '{claim.kind}'")
        try:
            passed, detail = handler(claim.params)
        except OrbispecException as e:
            return ClaimResult(claim, False, f"{type(e).__name__}: {e.message}")
        return ClaimResult(claim, passed, detail)

    def _check_isospectral(self, params) -> Tuple[bool, str]:
        other = entry_by_name(params["other"]).group
        failures = []
        for p in params["degrees"]:
            verdict = isospectral_compare(
                spectrum_table(self.entry.group, p, params["bound"], threads=self.threads),
                spectrum_table(other, p, params["bound"], threads=self.threads),
            )
            if not verdict.equal:
                failures.append(f"p={p} differs at mu^2 = {verdict.first_difference[0]}")
        return not failures, "; ".join(failures) or "equal"

    def _check_spectra_differ(self, params) -> Tuple[bool, str]:
        other = entry_by_name(params["other"]).group
        p, bound = params["p"], params["bound"]
        verdict = isospectral_compare(
            spectrum_table(self.entry.group, p, bound, threads=self.threads),
            spectrum_table(other, p, bound, threads=self.threads),
        )
        if verdict.equal:
            return False, "spectra are equal"
        mu2, ma, mb = verdict.first_difference
        detail = f"first difference at mu^2 = {mu2}: {ma} vs {mb}"
        if "mu2" in params:
            return (mu2, [ma, mb]) == (params["mu2"], params["multiplicities"]), detail
        return True, detail

    def _check_strata(self, params) -> Tuple[bool, str]:
        expected = params["expected"]
        with_adjacency = any("adjacent_primary" in e for e in expected)
        want = Counter()
        for e in expected:
            key = (e["dim"], e["isotropy_order"], e["volume_squared"], e["primary"])
            if with_adjacency:
                key += (e.get("adjacent_primary"),)
            want[key] += e["count"]
        got = _strata_signature(self.strata, with_adjacency)
        return got == want, f"{len(self.strata)} strata found"

    def _check_parity(self, params) -> Tuple[bool, str]:
        plus, minus = parity_invariants(self.strata, params["p"])
        invariant = plus if params["epsilon"] == "+" else minus
        return invariant.exact == params["value"], f"B_{params['epsilon']}^{params['p']} = {invariant.exact}"

    def _check_singular_volume(self, params) -> Tuple[bool, str]:
        _, minus = parity_invariants(self.strata, params["p"])
        volume = singular_volume_from_B(minus.exact, self.entry.group.d, params["k"], params["p"])
        return volume == params["volume"], f"recovered volume {volume}"


def check_claims(entry: CatalogEntry, threads: Optional[int] = None) -> List[ClaimResult]:
    """Run every claim of the entry; failures are reported, not raised."""
    checker = _ClaimChecker(entry, threads)
    results = [checker.check(claim) for claim in entry.claims]
    failed = [r for r in results if not r.passed]
    if failed:
        app_logger.warning(f"{len(failed)} of {len(results)} claims failed for '{entry.name}'")
    else:
        app_logger.info(f"All {len(results)} claims hold for '{entry.name}'")
    return results
