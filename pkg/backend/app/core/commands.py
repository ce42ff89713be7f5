"""
Command execution shared by the CLI and the HTTP API.

Each command takes built groups and plain parameters and returns a
JSON-ready document (or CSV text), so both surfaces emit identical output.
"""
from typing import Any, Dict, Optional, Sequence, Union

from app.config import settings
from app.core.exceptions import NotApplicable, ValidationError
from app.geometry.catalog import LISTED_NAMES, check_claims, entry_by_name
from app.geometry.crystal import CrystalGroup, eigenvalue_type
from app.geometry.exact_linalg import to_fraction
from app.geometry.heat import assemble_expansion, manifold_discriminator, spectral_obstruction
from app.geometry.krawtchouk import blind_degrees, integer_zeros, krawtchouk, reflection_trace_check
from app.geometry.spectrum import isospectral_compare, spectrum_table
from app.geometry.strata import strata as compute_strata
from app.geometry.trace import validate_expansion
from app.models.request import Command, OutputFormat, RunConfig
from app.services.group_loader import group_loader
from app.services.logger import app_logger
from app.utils.serialization import jsonable, spectrum_csv


Document = Union[Dict[str, Any], str]


def _label(group: CrystalGroup) -> str:
    return group.name or "group"


def _require(value, flag: str):
    if value is None:
        raise ValidationError(f"Missing required option {flag}")
    return value


class CommandRunner:
    """Runs orbispec commands."""

    # ========================================================================
    # Group commands
    # ========================================================================

    def validate(self, group: CrystalGroup) -> Dict[str, Any]:
        elements = []
        for element in group.elements:
            et = eigenvalue_type(element.g)
            elements.append({
                "matrix": [list(r) for r in element.g.rows],
                "translation": list(element.a),
                "eigenvalue_type": et.label(),
                "fixed_dim": et.fixed_dim,
            })
        return jsonable({"valid": True, "order": group.order, "dimension": group.d, "elements": elements})

    def spectrum(
        self,
        group: CrystalGroup,
        p: int,
        max_norm2,
        output_format: OutputFormat = OutputFormat.JSON,
        cap: Optional[int] = None,
        threads: Optional[int] = None
    ) -> Document:
        table = spectrum_table(group, p, to_fraction(max_norm2), cap=cap, threads=threads)
        if output_format == OutputFormat.CSV:
            return spectrum_csv(table.rows())
        document = table.to_dict()
        document["group"] = _label(group)
        return jsonable(document)

    def compare(
        self,
        a: CrystalGroup,
        b: CrystalGroup,
        p: int,
        max_norm2,
        cap: Optional[int] = None,
        threads: Optional[int] = None
    ) -> Dict[str, Any]:
        bound = to_fraction(max_norm2)
        verdict = isospectral_compare(
            spectrum_table(a, p, bound, cap=cap, threads=threads),
            spectrum_table(b, p, bound, cap=cap, threads=threads),
        )
        app_logger.info(f"Compared '{_label(a)}' and '{_label(b)}' at p={p} up to {bound}: {verdict.to_dict()['verdict']}")
        return jsonable(verdict.to_dict())

    def strata(self, group: CrystalGroup, threads: Optional[int] = None) -> Dict[str, Any]:
        found = compute_strata(group, threads=threads)
        return jsonable({"group": _label(group), "strata": [s.to_dict() for s in found]})

    def heat(self, group: CrystalGroup, p: int, threads: Optional[int] = None) -> Dict[str, Any]:
        found = compute_strata(group, threads=threads)
        expansion = assemble_expansion(group, found, p)
        obstruction = spectral_obstruction(found, group.d, p)
        try:
            discriminator = {"applicable": True, **manifold_discriminator(found, group.d).to_dict()}
        except NotApplicable as e:
            discriminator = {"applicable": False, "reason": e.message}
        return jsonable({
            "group": _label(group),
            "p": p,
            "expansion": expansion.to_dict(),
            "B_plus": obstruction.plus.to_dict(),
            "B_minus": obstruction.minus.to_dict(),
            "obstruction": obstruction.to_dict(),
            "discriminator": discriminator,
        })

    def trace_check(
        self,
        group: CrystalGroup,
        p: int,
        t_grid: Optional[Sequence[float]] = None,
        max_norm2=None,
        cap: Optional[int] = None,
        threads: Optional[int] = None
    ) -> Dict[str, Any]:
        bound = to_fraction(max_norm2) if max_norm2 is not None else None
        report = validate_expansion(group, p, t_grid=t_grid, bound=bound, cap=cap, threads=threads)
        return jsonable(report.to_dict())

    # ========================================================================
    # Table and catalog commands
    # ========================================================================

    def krawtchouk(
        self,
        d: int,
        p: Optional[int] = None,
        k: Optional[int] = None,
        zeros_only: bool = False
    ) -> Dict[str, Any]:
        document: Dict[str, Any] = {"d": d, "p": p}
        if k is not None:
            p = _require(p, "--p")
            trace, value = reflection_trace_check(d, k, p)
            document.update({"k": k, "value": value, "reflection_trace": trace})
            return jsonable(document)
        if p is not None:
            document["zeros"] = integer_zeros(d, p)
            if zeros_only:
                return jsonable(document)
            document["values"] = [krawtchouk(d, p, j) for j in range(d + 1)]
        document["blind_degrees"] = blind_degrees(d)
        return jsonable(document)

    def catalog_list(self) -> Dict[str, Any]:
        return jsonable({"entries": [entry_by_name(name).to_dict() for name in LISTED_NAMES]})

    def catalog_emit(self, name: str) -> Dict[str, Any]:
        spec = group_loader.to_spec(entry_by_name(name).group)
        return spec.model_dump(exclude_none=True)

    def catalog_check(self, name: str, threads: Optional[int] = None) -> Dict[str, Any]:
        results = check_claims(entry_by_name(name), threads=threads)
        return jsonable({
            "entry": name,
            "passed": all(r.passed for r in results),
            "results": [r.to_dict() for r in results],
        })

    # ========================================================================
    # Dispatch
    # ========================================================================

    def run(self, config: RunConfig) -> Document:
        """
        Execute one CLI configuration.

        Group references are file paths or 'catalog:NAME'.
        """
        cap = config.enum_cap if config.enum_cap is not None else settings.ENUMERATION_CAP
        threads = config.threads
        command = config.command

        if command == Command.KRAWTCHOUK:
            return self.krawtchouk(_require(config.d, "--d"), config.p, config.k, config.zeros)
        if command == Command.CATALOG:
            if config.catalog_emit:
                return self.catalog_emit(config.catalog_emit)
            if config.catalog_check:
                return self.catalog_check(config.catalog_check, threads=threads)
            return self.catalog_list()

        group = group_loader.resolve(_require(config.group, "--group"))
        if command == Command.VALIDATE:
            return self.validate(group)
        if command == Command.STRATA:
            return self.strata(group, threads=threads)

        p = _require(config.p, "--p")
        if command == Command.SPECTRUM:
            return self.spectrum(group, p, _require(config.max_norm2, "--max-norm2"), config.format, cap, threads)
        if command == Command.COMPARE:
            other = group_loader.resolve(_require(config.group_b, "--b"))
            return self.compare(group, other, p, _require(config.max_norm2, "--max-norm2"), cap, threads)
        if command == Command.HEAT:
            return self.heat(group, p, threads=threads)
        if command == Command.TRACE_CHECK:
            return self.trace_check(group, p, t_grid=config.t or None, max_norm2=config.max_norm2, cap=cap, threads=threads)
        raise ValidationError(f"Unknown command {command}")


# Global runner instance
command_runner = CommandRunner()
