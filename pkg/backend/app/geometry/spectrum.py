"""
Hodge p-spectra of flat orbifolds.

The multiplicity of mu in the p-spectrum is

    m_{p,mu} = (1/|F|) sum_gamma tr_p(gamma) e_mu(gamma),

where e_mu(gamma) sums exp(2 pi i v.a) over dual vectors of norm mu fixed by
gamma (g^T v = v). Eigenvalues are keyed by the exact rational mu^2; the
eigenvalue itself is 4 pi^2 mu^2.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.config import settings
from app.core.exceptions import BoundMismatch, ToleranceViolation, ValidationError
from app.geometry.crystal import AffineElement, CrystalGroup, tr_p
from app.geometry.exact_linalg import dot, to_fraction
from app.geometry.lattice import DualShellTable, enumerate_shells
from app.services.logger import app_logger
from app.utils.parallel import ordered_map


_EXACT_COS = {
    Fraction(0): 1.0,
    Fraction(1, 2): -1.0,
    Fraction(1, 4): 0.0,
    Fraction(3, 4): 0.0,
    Fraction(1, 3): -0.5,
    Fraction(2, 3): -0.5,
    Fraction(1, 6): 0.5,
    Fraction(5, 6): 0.5,
}
_EXACT_SIN = {
    Fraction(0): 0.0,
    Fraction(1, 2): 0.0,
    Fraction(1, 4): 1.0,
    Fraction(3, 4): -1.0,
}


def cos_turn(phase: Fraction) -> float:
    """cos(2 pi phase), exact for the phases crystallographic groups produce."""
    phase = phase % 1
    if phase in _EXACT_COS:
        return _EXACT_COS[phase]
    return math.cos(2 * math.pi * float(phase))


def sin_turn(phase: Fraction) -> float:
    phase = phase % 1
    if phase in _EXACT_SIN:
        return _EXACT_SIN[phase]
    return math.sin(2 * math.pi * float(phase))


def fixed_phases(element: AffineElement, vectors) -> Dict[Fraction, int]:
    """Count dual vectors fixed by g^T, grouped by exact phase v.a mod 1."""
    gt = element.g.T
    is_identity = element.g == type(element.g).identity(element.d)
    counts: Dict[Fraction, int] = {}
    for v in vectors:
        if not is_identity and gt @ v != tuple(v):
            continue
        phase = dot(v, element.a) % 1
        counts[phase] = counts.get(phase, 0) + 1
    return counts


def fourier_character(
    group: CrystalGroup,
    element: AffineElement,
    mu2,
    shells: DualShellTable
) -> Tuple[float, float]:
    """
    e_mu(gamma) as a (real, imaginary) pair.

    Raises:
        ToleranceViolation: if the imaginary part exceeds the configured gate
    """
    mu2 = to_fraction(mu2)
    if mu2 > shells.bound:
        raise ValidationError(f"mu^2 = {mu2} lies beyond the shell bound {shells.bound}")
    counts = fixed_phases(element, shells.shells.get(mu2, ()))
    phases = sorted(counts)
    real = math.fsum(counts[ph] * cos_turn(ph) for ph in phases)
    imag = math.fsum(counts[ph] * sin_turn(ph) for ph in phases)
    if abs(imag) > settings.IMAGINARY_TOLERANCE:
        raise ToleranceViolation(
            f"Character at mu^2 = {mu2} has imaginary part {imag:.3e}",
            context={"mu2": str(mu2), "imag": imag, "group": group.name}
        )
    return real, imag


def trace_weights(group: CrystalGroup, p: int) -> List[int]:
    """tr_p of every holonomy element, in group order."""
    if not 0 <= p <= group.d:
        raise ValidationError(f"Degree p = {p} outside 0..{group.d}")
    return [tr_p(e.g, p) for e in group.elements]


def _multiplicity(group: CrystalGroup, weights: List[int], mu2: Fraction, shells: DualShellTable) -> int:
    terms = []
    for element, weight in zip(group.elements, weights):
        if weight == 0:
            continue
        real, _ = fourier_character(group, element, mu2, shells)
        terms.append(weight * real)
    value = math.fsum(terms) / group.order
    rounded = round(value)
    if abs(value - rounded) >= settings.INTEGRALITY_TOLERANCE or rounded < 0:
        raise ToleranceViolation(
            f"Multiplicity at mu^2 = {mu2} evaluates to {value!r}, not a nonnegative integer",
            context={"mu2": str(mu2), "value": value, "group": group.name}
        )
    return int(rounded)


def multiplicity(group: CrystalGroup, p: int, mu2, shells: DualShellTable) -> int:
    """m_{p,mu} for the shell mu^2."""
    return _multiplicity(group, trace_weights(group, p), to_fraction(mu2), shells)


@dataclass(frozen=True)
class SpectrumTable:
    """Exact p-spectrum up to bound; zero multiplicities are omitted."""
    p: int
    bound: Fraction
    entries: Dict[Fraction, int] = field(default_factory=dict)
    group_name: str = ""
    shells: List[Dict] = field(default_factory=list)

    def get(self, mu2) -> int:
        return self.entries.get(to_fraction(mu2), 0)

    @staticmethod
    def eigenvalue(mu2: Fraction) -> float:
        return 4 * math.pi ** 2 * float(mu2)

    def rows(self) -> List[Dict]:
        return [
            {"mu2": k, "multiplicity": m, "eigenvalue": self.eigenvalue(k)}
            for k, m in self.entries.items()
        ]

    def to_dict(self) -> Dict:
        return {
            "group": self.group_name,
            "p": self.p,
            "bound": self.bound,
            "entries": self.rows(),
            "shells": self.shells,
        }


def spectrum_table(
    group: CrystalGroup,
    p: int,
    bound,
    shells: Optional[DualShellTable] = None,
    cap: Optional[int] = None,
    threads: Optional[int] = None
) -> SpectrumTable:
    """
    Complete p-spectrum table up to mu^2 <= bound.

    Args:
        group: Crystallographic group
        p: Form degree
        bound: Largest mu^2 to include
        shells: Precomputed dual shells covering bound (enumerated if omitted)
        cap: Enumeration cap
        threads: Worker count
    """
    bound = to_fraction(bound)
    if shells is None or shells.bound < bound:
        shells = enumerate_shells(group.L, bound, cap=cap, threads=threads)
    weights = trace_weights(group, p)
    keys = [k for k in shells.keys if k <= bound]

    counts = ordered_map(lambda k: _multiplicity(group, weights, k, shells), keys, threads)
    entries = {k: m for k, m in zip(keys, counts) if m}

    app_logger.info(
        f"Spectrum of '{group.name or 'group'}' p={p} up to {bound}: "
        f"{len(entries)} eigenvalues from {len(keys)} shells"
    )
    return SpectrumTable(
        p=p, bound=bound, entries=entries, group_name=group.name, shells=shells.restrict(bound).summary()
    )


@dataclass(frozen=True)
class CompareResult:
    equal: bool
    first_difference: Optional[Tuple[Fraction, int, int]] = None

    def to_dict(self) -> Dict:
        if self.equal:
            return {"verdict": "equal"}
        mu2, ma, mb = self.first_difference
        return {
            "verdict": "first_difference",
            "first_difference": {"mu2": mu2, "multiplicity_a": ma, "multiplicity_b": mb},
        }


def isospectral_compare(a: SpectrumTable, b: SpectrumTable) -> CompareResult:
    """
    Exact key-by-key comparison.

    Raises:
        BoundMismatch: if the tables differ in degree or bound
    """
    if a.p != b.p or a.bound != b.bound:
        raise BoundMismatch(
            f"Cannot compare p={a.p} up to {a.bound} with p={b.p} up to {b.bound}",
            context={"a": {"p": a.p, "bound": str(a.bound)}, "b": {"p": b.p, "bound": str(b.bound)}}
        )
    for mu2 in sorted(set(a.entries) | set(b.entries)):
        ma, mb = a.get(mu2), b.get(mu2)
        if ma != mb:
            return CompareResult(equal=False, first_difference=(mu2, ma, mb))
    return CompareResult(equal=True)
