"""
Truncated heat traces and the per-element Poisson identity.

For one group element gamma = (g, a) the spectral side

    sum over dual v with g^T v = v of exp(2 pi i v.a) exp(-4 pi^2 |v|^2 t)

equals, up to terms of order exp(-c / t), the geometric side

    sum over fixed components C of vol(C) (4 pi t)^(-dim C / 2) / |det(I - A)|.

Every truncation is certified: the discarded part of a sum is bounded with a
lattice-point majorant and a geometric series, and the bound grows until the
discarded part is negligible.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from app.config import settings
from app.core.exceptions import ValidationError, ValidationFailed
from app.geometry.crystal import AffineElement, CrystalGroup, det_normal_factor, tr_p
from app.geometry.exact_linalg import QMatrix, ZMatrix, dot, integer_kernel
from app.geometry.heat import AsymptoticExpansion, assemble_expansion
from app.geometry.krawtchouk import binom
from app.geometry.lattice import LatticeGram, count_majorant, dual_gram, enumerate_form
from app.geometry.spectrum import cos_turn, spectrum_table
from app.geometry.strata import Stratum, fixed_set, strata as compute_strata
from app.services.logger import app_logger
from app.utils.parallel import ordered_map


# Each tail step covers one e-fold of the exponential.
_GEOMETRIC_RATIO = 0.9
_BOUND_GROWTH = Fraction(5, 4)
_MAX_BOUND_STEPS = 200


DualForm = Union[LatticeGram, QMatrix]


def _dual_form(form: DualForm) -> QMatrix:
    return dual_gram(form) if isinstance(form, LatticeGram) else form


def shell_count_majorant(L: DualForm, x: float) -> float:
    """
    Upper bound on #{v : v^T G* v <= x} for the dual lattice of L.

    A QMatrix is taken as the dual-side form itself, as for the fixed
    sublattices summed in the per-element spectral side.
    """
    return count_majorant(_dual_form(L), x)


def tail_majorant(Q: DualForm, t: float, bound, weight: float = 1.0) -> float:
    """
    Bound on sum over v with v^T Q v > bound of weight * exp(-4 pi^2 t v^T Q v).

    The range above `bound` is cut into steps of one e-fold; each step is
    charged the count majorant at its upper end times the exponential at its
    lower end. Once consecutive terms shrink by 0.9 or better the rest is
    summed as a geometric series.
    """
    rate = 4 * math.pi ** 2 * t
    step = 1 / rate
    x = float(bound)
    total = 0.0
    previous = None
    j = 0
    while True:
        term = weight * shell_count_majorant(Q, x + (j + 1) * step) * math.exp(-rate * x - j)
        total += term
        if previous is not None and previous > 0:
            ratio = term / previous
            if ratio <= _GEOMETRIC_RATIO:
                return total + term * ratio / (1 - ratio)
        if term == 0.0:
            return total
        previous = term
        j += 1


def certified_bound(Q: DualForm, t: float, target: float, weight: float = 1.0, start=None) -> Fraction:
    """Smallest bound on the 5/4-geometric ladder from `start` whose tail is <= target."""
    rate = 4 * math.pi ** 2 * t
    bound = Fraction(start) if start is not None else Fraction(math.ceil(1 / rate))
    bound = max(bound, Fraction(1))
    for _ in range(_MAX_BOUND_STEPS):
        if tail_majorant(Q, t, bound, weight) <= target:
            return bound
        bound = Fraction(math.ceil(bound * _BOUND_GROWTH))
    raise ValidationError(f"No certified truncation found for t = {t}", context={"t": t})


@dataclass(frozen=True)
class TraceSample:
    """A truncated heat trace with a certified bound on what was left out."""
    p: int
    t: float
    value: float
    truncation_bound: Fraction
    tail_estimate: float

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "t": self.t,
            "value": self.value,
            "truncation_bound": self.truncation_bound,
            "tail_estimate": self.tail_estimate,
        }


def _check_t(t: float) -> None:
    if not t > 0:
        raise ValidationError(f"t must be positive, got {t}")


def _trace_sum(entries: Dict[Fraction, int], t: float) -> float:
    keys = sorted(entries)
    if not keys:
        return 0.0
    weights = np.exp(-4 * math.pi ** 2 * t * np.array([float(k) for k in keys]))
    return math.fsum(entries[k] * float(w) for k, w in zip(keys, weights))


def truncated_trace(
    group: CrystalGroup,
    p: int,
    t: float,
    bound=None,
    cap: Optional[int] = None,
    threads: Optional[int] = None
) -> TraceSample:
    """
    sum over the p-spectrum of multiplicity * exp(-4 pi^2 mu^2 t).

    The bound is enlarged until the certified tail is below
    TAIL_RELATIVE_TOLERANCE times the computed value.

    Raises:
        BudgetExceeded: if the needed bound exceeds the enumeration cap
    """
    _check_t(t)
    d = group.d
    weight = float(binom(d, p))
    tolerance = settings.TAIL_RELATIVE_TOLERANCE
    L = group.L

    current = Fraction(bound) if bound is not None else certified_bound(L, t, tolerance * weight, weight)
    for _ in range(_MAX_BOUND_STEPS):
        table = spectrum_table(group, p, current, cap=cap, threads=threads)
        value = _trace_sum(table.entries, t)
        tail = tail_majorant(L, t, current, weight)
        target = tolerance * value if value > 0 else tolerance
        if tail <= target:
            return TraceSample(p=p, t=t, value=value, truncation_bound=current, tail_estimate=tail)
        enlarged = certified_bound(L, t, target, weight, start=current)
        app_logger.debug(f"Trace tail {tail:.3e} above {target:.3e} at bound {current}; enlarging to {enlarged}")
        current = enlarged
    raise ValidationError(f"Trace truncation did not converge at t = {t}")


def _fixed_dual_form(group: CrystalGroup, element: AffineElement):
    """Integer basis K of {v : g^T v = v} and the dual form restricted to it."""
    d = group.d
    if element.g == ZMatrix.identity(d):
        basis = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    else:
        basis = integer_kernel(element.g.T - ZMatrix.identity(d))
    if not basis:
        return [], None
    K = QMatrix([list(col) for col in zip(*basis)])
    return basis, K.T @ dual_gram(group.L) @ K


def element_spectral_side(
    group: CrystalGroup,
    element: AffineElement,
    t: float,
    bound=None,
    cap: Optional[int] = None,
    threads: Optional[int] = None
) -> float:
    """The gamma term of the trace before the tr_p weighting, summed over fixed dual vectors."""
    _check_t(t)
    basis, Q = _fixed_dual_form(group, element)
    if Q is None:
        return 1.0

    target = settings.TAIL_RELATIVE_TOLERANCE
    bound = Fraction(bound) if bound is not None else certified_bound(Q, t, target)
    table = enumerate_form(Q, bound, cap=cap, threads=threads)

    shells: Dict[Fraction, float] = {}
    for mu2, vectors in table.shells.items():
        phases: Dict[Fraction, int] = {}
        for w in vectors:
            v = [sum(b[i] * c for b, c in zip(basis, w)) for i in range(group.d)]
            phase = dot(v, element.a) % 1
            phases[phase] = phases.get(phase, 0) + 1
        shells[mu2] = math.fsum(n * cos_turn(ph) for ph, n in sorted(phases.items()))
    return _trace_sum(shells, t)


def element_geometric_side(group: CrystalGroup, element: AffineElement, t: float) -> float:
    """sum over fixed components of vol(C) (4 pi t)^(-dim C / 2) / |det(I - A)|; 0 without fixed points."""
    _check_t(t)
    if element.is_identity:
        return math.sqrt(group.L.det) * (4 * math.pi * t) ** (-group.d / 2)
    components = fixed_set(group, element)
    if not components:
        return 0.0
    factor = float(det_normal_factor(element.g))
    return math.fsum(c.volume * (4 * math.pi * t) ** (-c.dim / 2) for c in components) / factor


def poisson_check(
    group: CrystalGroup,
    element: AffineElement,
    t: float,
    bound=None,
    cap: Optional[int] = None,
    threads: Optional[int] = None
) -> float:
    """|spectral side - geometric side| for one element."""
    spectral = element_spectral_side(group, element, t, bound=bound, cap=cap, threads=threads)
    return abs(spectral - element_geometric_side(group, element, t))


def element_assembly(group: CrystalGroup, p: int, t: float) -> float:
    """(1/|F|) sum over gamma of tr_p(gamma) times its geometric side."""
    def term(element: AffineElement) -> float:
        weight = tr_p(element.g, p)
        return weight * element_geometric_side(group, element, t) if weight else 0.0

    return math.fsum(ordered_map(term, group.elements)) / group.order


@dataclass(frozen=True)
class ResidualPoint:
    t: float
    dimension: int
    trace: float
    tail_estimate: float
    truncation_bound: Fraction
    expansion_value: float
    element_value: float
    residual: float

    @property
    def normalized_residual(self) -> float:
        """Residual times (4 pi t)^(d/2), which removes the polynomial growth as t -> 0."""
        return self.residual * (4 * math.pi * self.t) ** (self.dimension / 2)

    @property
    def above_rounding(self) -> bool:
        return self.residual > 1e-11 * max(1.0, abs(self.expansion_value))

    def to_dict(self) -> Dict:
        return {
            "t": self.t,
            "value": self.trace,
            "tail_estimate": self.tail_estimate,
            "truncation_bound": self.truncation_bound,
            "expansion_value": self.expansion_value,
            "element_value": self.element_value,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class ValidationReport:
    group_name: str
    p: int
    expansion: AsymptoticExpansion
    points: List[ResidualPoint] = field(default_factory=list)
    routes_agree: bool = True
    decay_rate: Optional[float] = None

    @property
    def worst_residual(self) -> float:
        return max((pt.residual for pt in self.points), default=0.0)

    def to_dict(self) -> Dict:
        return {
            "group": self.group_name,
            "p": self.p,
            "expansion": self.expansion.to_dict(),
            "samples": [pt.to_dict() for pt in self.points],
            "routes_agree": self.routes_agree,
            "decay_rate": self.decay_rate,
            "worst_residual": self.worst_residual,
        }


def _decay_rate(points: Sequence[ResidualPoint]) -> Optional[float]:
    """
    Check that normalized residuals fall strictly as t falls.

    Residuals at rounding level count as converged and may not rise again.
    Returns the least-squares rate -d log r / d(1/t) over the samples above
    rounding level, or None when fewer than two remain.

    Raises:
        ValidationFailed: on a rise or a non-positive fitted rate
    """
    ordered = sorted(points, key=lambda pt: -pt.t)
    worst = {"worst_residual": max(pt.residual for pt in points)}

    for before, after in zip(ordered, ordered[1:]):
        if not after.above_rounding:
            continue
        if not before.above_rounding or after.normalized_residual >= before.normalized_residual:
            raise ValidationFailed(
                f"Residual does not decay: {before.residual:.3e} at t={before.t} "
                f"vs {after.residual:.3e} at t={after.t}",
                context=worst
            )

    live = [pt for pt in ordered if pt.above_rounding]
    if len(live) < 2:
        return None
    x = np.array([1 / pt.t for pt in live])
    y = np.log(np.array([pt.normalized_residual for pt in live]))
    slope, _ = np.polyfit(x, y, 1)
    rate = -float(slope)
    if rate <= 0:
        raise ValidationFailed(f"Fitted decay rate {rate:.3e} is not positive", context=worst)
    return rate


def validate_expansion(
    group: CrystalGroup,
    p: int,
    t_grid: Optional[Sequence[float]] = None,
    strata: Optional[Sequence[Stratum]] = None,
    bound=None,
    cap: Optional[int] = None,
    threads: Optional[int] = None
) -> ValidationReport:
    """
    Compare truncated traces with the assembled expansion across a t grid.

    Raises:
        ValidationFailed: when the strata and per-element routes disagree, or
            when the residuals do not decay exponentially
    """
    t_grid = list(t_grid) if t_grid else settings.default_t_grid
    for t in t_grid:
        _check_t(t)
    if strata is None:
        strata = compute_strata(group, threads=threads)
    expansion = assemble_expansion(group, strata, p)

    points = []
    for t in t_grid:
        sample = truncated_trace(group, p, t, bound=bound, cap=cap, threads=threads)
        expected = expansion.evaluate(t)
        element_value = element_assembly(group, p, t)
        if abs(element_value - expected) > 1e-10 * max(1.0, abs(expected)):
            app_logger.error(
                f"Expansion routes disagree at t={t}: strata {expected!r} vs elements {element_value!r}"
            )
            raise ValidationFailed(
                f"Strata and per-element expansions disagree at t = {t}",
                context={"t": t, "strata_value": expected, "element_value": element_value}
            )
        points.append(ResidualPoint(
            t=t,
            trace=sample.value,
            tail_estimate=sample.tail_estimate,
            truncation_bound=sample.truncation_bound,
            expansion_value=expected,
            element_value=element_value,
            residual=abs(sample.value - expected),
            dimension=group.d,
        ))

    rate = _decay_rate(points)
    app_logger.info(
        f"Validated expansion of '{group.name or 'group'}' p={p}: "
        f"worst residual {max(pt.residual for pt in points):.3e}, rate {rate}"
    )
    return ValidationReport(
        group_name=group.name,
        p=p,
        expansion=expansion,
        points=points,
        routes_agree=True,
        decay_rate=rate,
    )
