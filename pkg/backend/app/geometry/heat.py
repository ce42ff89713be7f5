"""
Heat invariants of flat orbifolds.

On a flat orbifold every local heat expansion stops at its first term, so the
small-t expansion of the p-form heat trace is

    (4 pi t)^(-d/2) C(d, p) vol(O) + sum_N (4 pi t)^(-dim N / 2) b_0^p(N) / |Iso(N)|

with b_0^p(N) = vol(N) * sum over Iso^max(N) of tr_p(g) / |det(I - A)|.
Coefficients are kept as exact fractions wherever the volumes allow; the
(4 pi t) normalization is only applied when an expansion is evaluated.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from app.core.exceptions import KrawtchoukZero, NotApplicable, ValidationError
from app.geometry.crystal import CrystalGroup, EigenvalueType, det_normal_factor, tr_p
from app.geometry.exact_linalg import ZMatrix, exact_sqrt
from app.geometry.krawtchouk import binom, krawtchouk
from app.geometry.strata import Stratum, primary_filter
from app.services.logger import app_logger


# Below this an inexact invariant is treated as zero.
ZERO_TOLERANCE = 1e-12


def b0_p_element(g: ZMatrix, p: int) -> Fraction:
    """tr_p(g) / |det(I - A)| for one isotropy element."""
    return Fraction(tr_p(g, p)) / det_normal_factor(g)


def b0_1_eigentype(et: EigenvalueType, d: int) -> float:
    """
    b_0^1 of an element given only its eigenvalue type:

        (d - k - r + sum_j 2 cos theta_j) * 2^-k * prod_j csc^2(theta_j / 2)

    with k = 2s + r the codimension; the product is 1 when s = 0.
    """
    k = 2 * et.s + et.r
    trace = d - k - et.r + math.fsum(2 * math.cos(theta) for theta in et.thetas)
    product = math.prod(1 / math.sin(theta / 2) ** 2 for theta in et.thetas)
    return trace * 2.0 ** -k * product


def _check_order(m: int) -> None:
    if m < 1:
        raise ValidationError(f"Rotation order must be at least 1, got {m}")


def b0_1_codim2_cyclic(d: int, m: int) -> Fraction:
    """b_0^1 per unit volume of a codim-2 stratum with cyclic isotropy of order m."""
    _check_order(m)
    if d < 2:
        raise ValidationError(f"Codimension-2 strata need d >= 2, got {d}")
    return Fraction((d - 2) * (m * m - 1), 12) + Fraction(m * m - 6 * m + 5, 6)


def b0_0_codim2_cyclic(m: int) -> Fraction:
    _check_order(m)
    return Fraction(m * m - 1, 12)


def trig_sums(m: int) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """
    Closed forms over j = 1..m-1 with x_j = pi j / m:

        sum csc^2 x_j,  sum cos(2 x_j) csc^2 x_j,
        sum cos(2 x_j) csc^4 x_j,  sum csc^4 x_j
    """
    _check_order(m)
    m2, m4 = m * m, m ** 4
    return (
        Fraction(m2 - 1, 3),
        Fraction(m2 - 6 * m + 5, 3),
        Fraction(m4 - 20 * m2 + 19, 45),
        Fraction(m4 + 10 * m2 - 11, 45),
    )


def trig_sums_direct(m: int) -> Tuple[float, float, float, float]:
    """The sums of `trig_sums`, evaluated term by term in floating point."""
    _check_order(m)
    xs = [math.pi * j / m for j in range(1, m)]
    csc2 = [1 / math.sin(x) ** 2 for x in xs]
    cos2 = [math.cos(2 * x) for x in xs]
    return (
        math.fsum(csc2),
        math.fsum(c * s for c, s in zip(cos2, csc2)),
        math.fsum(c * s * s for c, s in zip(cos2, csc2)),
        math.fsum(s * s for s in csc2),
    )


def b0_1_codim4_constant_angle(d: int, m: int) -> Fraction:
    """b_0^1 per unit volume for cyclic isotropy of order m rotating two planes by the same angle."""
    _check_order(m)
    if d < 4:
        raise ValidationError(f"Codimension-4 strata need d >= 4, got {d}")
    m2, m4 = m * m, m ** 4
    return Fraction(4 * (m4 - 20 * m2 + 19) + (d - 4) * (m4 + 10 * m2 - 11), 720)


def b0_1_order3(d: int, s: int) -> Fraction:
    """Per-element b_0^1 for an order-3 element rotating s planes by 2 pi / 3."""
    if s < 1 or 2 * s > d:
        raise ValidationError(f"Need 1 <= s <= d/2, got s = {s} in d = {d}")
    return Fraction(d - 3 * s, 3 ** s)


def b0_density(stratum: Stratum, p: int) -> Fraction:
    """sum over Iso^max(N) of b0_p_element; b_0^p(N) is this times vol(N)."""
    return sum((b0_p_element(e.g, p) for e in stratum.iso_max), Fraction(0))


def stratum_b0(stratum: Stratum, p: int) -> float:
    return stratum.volume * float(b0_density(stratum, p))


def stratum_b0_exact(stratum: Stratum, p: int) -> Optional[Fraction]:
    """b_0^p(N) as a fraction when vol(N) is rational."""
    volume = exact_sqrt(stratum.volume_squared)
    if volume is None:
        return None
    return volume * b0_density(stratum, p)


@dataclass(frozen=True)
class ParityInvariant:
    """B_eps^p: weighted b_0^p over the minimal-codimension primary strata of one parity."""
    epsilon: str
    k: Optional[int]
    value: float
    exact: Optional[Fraction] = None

    @property
    def is_zero(self) -> bool:
        if self.exact is not None:
            return self.exact == 0
        return abs(self.value) < ZERO_TOLERANCE

    def to_dict(self) -> Dict:
        return {"epsilon": self.epsilon, "k": self.k, "value": self.value, "exact": self.exact}


def _parity_invariant(epsilon: str, primaries: List[Stratum], p: int) -> ParityInvariant:
    parity = 0 if epsilon == "+" else 1
    codims = [s.codim for s in primaries if s.codim % 2 == parity]
    if not codims:
        return ParityInvariant(epsilon, None, 0.0, Fraction(0))

    k = min(codims)
    chosen = [s for s in primaries if s.codim == k]
    value = math.fsum(stratum_b0(s, p) / s.isotropy_order for s in chosen)
    exact_parts = [stratum_b0_exact(s, p) for s in chosen]
    exact = None
    if all(x is not None for x in exact_parts):
        exact = sum((x / s.isotropy_order for x, s in zip(exact_parts, chosen)), Fraction(0))
    return ParityInvariant(epsilon, k, value, exact)


def parity_invariants(strata: Sequence[Stratum], p: int) -> Tuple[ParityInvariant, ParityInvariant]:
    """(B_+^p, B_-^p); each is zero when no primary stratum of that parity exists."""
    primaries = primary_filter(strata)
    return _parity_invariant("+", primaries, p), _parity_invariant("-", primaries, p)


def singular_volume_from_B(B_minus, d: int, k: int, p: int):
    """
    Total volume of the codim-k singular set recovered from B_-^p, for
    orbifolds whose odd-codimension strata all have isotropy of order two.

    Raises:
        KrawtchoukZero: if K_p^d(k) = 0, where the p-spectrum cannot see that set
    """
    if k % 2 == 0:
        raise ValidationError(f"Codimension k = {k} must be odd")
    kraw = krawtchouk(d, p, k)
    if kraw == 0:
        raise KrawtchoukZero(
            f"K_{p}^{d}({k}) = 0: the {p}-spectrum does not determine the codimension-{k} singular volume",
            context={"d": d, "p": p, "k": k}
        )
    if isinstance(B_minus, (int, Fraction)):
        return Fraction(2 ** (k + 1)) * Fraction(B_minus) / kraw
    return 2 ** (k + 1) * B_minus / kraw


@dataclass(frozen=True)
class DiscriminatorVerdict:
    verdict: str
    certificate: str
    margin: Optional[float] = None
    margin_exact: Optional[Fraction] = None

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict,
            "certificate": self.certificate,
            "margin": self.margin,
            "margin_exact": self.margin_exact,
        }


def manifold_discriminator(strata: Sequence[Stratum], d: int) -> DiscriminatorVerdict:
    """
    Decide whether the joint 0- and 1-spectra separate the orbifold from
    every closed manifold.

    A primary stratum of odd codimension gives B_-^0 > 0, which no manifold
    has. Otherwise, if every singular stratum has codimension at most 3, the
    t^1 coefficients satisfy c_2^1 - (d - 6) c_2^0 = 0 on manifolds while the
    codim-2 strata contribute a strictly positive margin.

    Raises:
        NotApplicable: with no strata, or a stratum of codimension above 3
    """
    if not strata:
        raise NotApplicable("The orbifold has no singular strata")

    primaries = primary_filter(strata)
    odd = [s for s in primaries if s.codim % 2 == 1]
    if odd:
        k = min(s.codim for s in odd)
        return DiscriminatorVerdict(
            verdict="not-isospectral-to-any-manifold",
            certificate=f"primary stratum of odd codimension {k} (B_-^0 > 0)",
        )

    deep = max(s.codim for s in strata)
    if deep > 3:
        raise NotApplicable(
            f"Singular set reaches codimension {deep}; the margin certificate needs codimension <= 3",
            context={"max_codim": deep}
        )

    codim2 = [s for s in primaries if s.codim == 2]
    margin = math.fsum(
        (stratum_b0(s, 1) - (d - 6) * stratum_b0(s, 0)) / s.isotropy_order for s in codim2
    )
    exact_parts = [(stratum_b0_exact(s, 1), stratum_b0_exact(s, 0), s) for s in codim2]
    margin_exact = None
    if all(one is not None and zero is not None for one, zero, _ in exact_parts):
        margin_exact = sum(
            ((one - (d - 6) * zero) / s.isotropy_order for one, zero, s in exact_parts),
            Fraction(0)
        )

    positive = margin_exact > 0 if margin_exact is not None else margin > ZERO_TOLERANCE
    if positive:
        return DiscriminatorVerdict(
            verdict="not-isospectral-to-any-manifold",
            certificate="joint 0- and 1-spectra: c_2^1 - (d-6) c_2^0 > 0",
            margin=margin,
            margin_exact=margin_exact,
        )
    return DiscriminatorVerdict(
        verdict="inconclusive",
        certificate="codimension-2 margin vanishes",
        margin=margin,
        margin_exact=margin_exact,
    )


def a1_coefficient(d: int, p: int) -> Fraction:
    """C(d, p) / 6 - C(d - 2, p - 1), the multiplier of the total scalar curvature."""
    return Fraction(binom(d, p), 6) - binom(d - 2, p - 1)


def a_coefficients(d: int, p: int, vol, total_scalar_curvature=0):
    """
    (a_0, a_1) of a closed Riemannian manifold:
    a_0 = C(d, p) vol and a_1 = a1_coefficient(d, p) * integral of tau.
    """
    if vol <= 0:
        raise ValidationError(f"Volume must be positive, got {vol}")
    a1 = a1_coefficient(d, p)
    if isinstance(vol, float) or isinstance(total_scalar_curvature, float):
        return binom(d, p) * vol, float(a1) * total_scalar_curvature
    return binom(d, p) * Fraction(vol), a1 * Fraction(total_scalar_curvature)


@dataclass(frozen=True)
class AsymptoticExpansion:
    """
    Finite expansion sum_e coeff_e (4 pi t)^e keyed by the exponent e.

    `exact_terms` repeats the coefficients that are exact fractions.
    """
    d: int
    p: int
    terms: Dict[Fraction, float] = field(default_factory=dict)
    exact_terms: Dict[Fraction, Fraction] = field(default_factory=dict)

    def evaluate(self, t: float) -> float:
        if t <= 0:
            raise ValidationError(f"t must be positive, got {t}")
        return math.fsum(c * (4 * math.pi * t) ** float(e) for e, c in sorted(self.terms.items()))

    def to_dict(self) -> Dict:
        return {
            "d": self.d,
            "p": self.p,
            "terms": [
                {"exponent": e, "coefficient": c, "exact": self.exact_terms.get(e)}
                for e, c in sorted(self.terms.items())
            ],
        }


def assemble_expansion(group: CrystalGroup, strata: Sequence[Stratum], p: int) -> AsymptoticExpansion:
    """Heat-trace expansion of the p-form Laplacian from the volume and the strata."""
    d = group.d
    if not 0 <= p <= d:
        raise ValidationError(f"Degree p = {p} outside 0..{d}")

    volume_squared = group.L.det / group.order ** 2
    leading = Fraction(-d, 2)
    terms: Dict[Fraction, List[float]] = {leading: [binom(d, p) * math.sqrt(volume_squared)]}
    exact: Dict[Fraction, Optional[Fraction]] = {}
    root = exact_sqrt(volume_squared)
    exact[leading] = None if root is None else binom(d, p) * root

    for stratum in strata:
        exponent = Fraction(-stratum.dim, 2)
        terms.setdefault(exponent, []).append(stratum_b0(stratum, p) / stratum.isotropy_order)
        part = stratum_b0_exact(stratum, p)
        if exponent not in exact:
            exact[exponent] = Fraction(0)
        if part is None or exact[exponent] is None:
            exact[exponent] = None
        else:
            exact[exponent] += part / stratum.isotropy_order

    expansion = AsymptoticExpansion(
        d=d,
        p=p,
        terms={e: math.fsum(values) for e, values in terms.items()},
        exact_terms={e: x for e, x in exact.items() if x is not None},
    )
    app_logger.debug(
        f"Expansion of '{group.name or 'group'}' p={p}: "
        + ", ".join(f"{e}: {c!r}" for e, c in sorted(expansion.terms.items()))
    )
    return expansion


@dataclass(frozen=True)
class Obstruction:
    verdict: str
    plus: ParityInvariant
    minus: ParityInvariant
    positivity_witness: Optional[Dict] = None

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict,
            "B_plus": self.plus.to_dict(),
            "B_minus": self.minus.to_dict(),
            "positivity_witness": self.positivity_witness,
        }


def _positivity_witness(primaries: List[Stratum], d: int, invariants) -> Optional[Dict]:
    for invariant in invariants:
        if invariant.k is None:
            continue
        for stratum in primaries:
            if stratum.codim != invariant.k:
                continue
            if 2 * stratum.codim < d or (2 * stratum.codim == d and stratum.isotropy_order >= 3):
                return {
                    "epsilon": invariant.epsilon,
                    "codim": stratum.codim,
                    "isotropy_order": stratum.isotropy_order,
                    "base_point": list(stratum.representative.base),
                }
    return None


def spectral_obstruction(strata: Sequence[Stratum], d: int, p: int) -> Obstruction:
    """
    What the parity invariants certify against manifolds.

    B_-^p is a p-spectral invariant vanishing on manifolds, so B_-^p != 0
    rules out every p-isospectral manifold. B_+^p != 0 does so among
    manifolds sharing a common finite cover.
    """
    plus, minus = parity_invariants(strata, p)
    witness = None
    if p == 1:
        witness = _positivity_witness(primary_filter(strata), d, (minus, plus))

    if not strata:
        verdict = "no-singularities"
    elif not minus.is_zero:
        verdict = "obstructed"
    elif not plus.is_zero:
        verdict = "obstructed-given-common-cover"
    else:
        verdict = "inconclusive"
    return Obstruction(verdict=verdict, plus=plus, minus=minus, positivity_witness=witness)
