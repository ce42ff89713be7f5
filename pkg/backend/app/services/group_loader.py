"""
Group file loading.

Reads crystal JSON files, validates them against GroupSpec and builds the
CrystalGroup. Every failure is reported with the file name and, where it
can be found, the line and column of the offending value.
"""
import json
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

from pydantic import ValidationError as PydanticValidationError

from app.config import settings
from app.core.exceptions import SchemaError, ValidationError
from app.geometry.catalog import entry_by_name
from app.geometry.crystal import AffineElement, CrystalGroup, build_group
from app.geometry.lattice import LatticeGram
from app.models.request import GroupRequest, GroupSpec
from app.services.logger import app_logger
from app.utils.serialization import rational_str


CATALOG_PREFIX = "catalog:"


def _line_col(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


def _locate(text: str, loc: Sequence[Union[str, int]]) -> Optional[Tuple[int, int]]:
    """Best-effort position of a pydantic error location: the last key found in order."""
    offset, found = 0, None
    for part in loc:
        if not isinstance(part, str):
            continue
        position = text.find(f'"{part}"', offset)
        if position < 0:
            break
        offset, found = position, position
    return _line_col(text, found) if found is not None else None


class GroupLoader:
    """Turns group files, inline specs and catalog names into CrystalGroups."""

    def parse(self, text: str, source: str = "<input>") -> GroupSpec:
        """
        Parse and validate group JSON.

        Raises:
            SchemaError: on malformed JSON or a schema violation
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(e.msg, source=source, line=e.lineno, column=e.colno)

        try:
            return GroupSpec.model_validate(data)
        except PydanticValidationError as e:
            first = e.errors()[0]
            where = _locate(text, first["loc"])
            path = ".".join(str(p) for p in first["loc"]) or "<root>"
            raise SchemaError(
                f"{path}: {first['msg']}",
                source=source,
                line=where[0] if where else None,
                column=where[1] if where else None
            )

    def from_spec(self, spec: GroupSpec, name: Optional[str] = None, order_cap: Optional[int] = None) -> CrystalGroup:
        L = LatticeGram.from_entries(spec.gram)
        generators = [
            AffineElement.of(g.matrix, g.translation if g.translation is not None else [0] * spec.dimension)
            for g in spec.generators
        ]
        return build_group(L, generators, order_cap=order_cap, name=name or spec.name or "")

    def load(self, path: Union[str, Path], order_cap: Optional[int] = None) -> CrystalGroup:
        """
        Load and build a group from a JSON file.

        Raises:
            SchemaError: if the file is unreadable or does not match the schema
            ValidationError: if the group is invalid, with the file in its context
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise SchemaError(f"cannot read file: {e.strerror}", source=str(path))

        spec = self.parse(text, source=str(path))
        try:
            group = self.from_spec(spec, name=spec.name or path.stem, order_cap=order_cap)
        except ValidationError as e:
            e.context.setdefault("source", str(path))
            index = e.context.get("generator")
            if index is not None:
                where = self._generator_position(text, index)
                if where:
                    e.context["line"], e.context["column"] = where
            raise
        app_logger.info(f"Loaded group '{group.name}' from {path}: d={group.d}, |F|={group.order}")
        return group

    @staticmethod
    def _generator_position(text: str, index: int) -> Optional[Tuple[int, int]]:
        offset = text.find('"generators"')
        if offset < 0:
            return None
        for _ in range(index + 1):
            offset = text.find('"matrix"', offset + 1)
            if offset < 0:
                return None
        return _line_col(text, offset)

    def resolve(self, ref: str, order_cap: Optional[int] = None) -> CrystalGroup:
        """A file path, or 'catalog:NAME' for a catalog entry."""
        if ref.startswith(CATALOG_PREFIX):
            return entry_by_name(ref[len(CATALOG_PREFIX):]).group
        return self.load(ref, order_cap=order_cap)

    def from_request(self, request: GroupRequest) -> CrystalGroup:
        if request.catalog is not None:
            return entry_by_name(request.catalog).group
        return self.from_spec(request.group, order_cap=settings.ORDER_CAP)

    @staticmethod
    def to_spec(group: CrystalGroup) -> GroupSpec:
        """Schema form of a group, listing every non-identity element as a generator."""
        return GroupSpec(
            dimension=group.d,
            gram=[[rational_str(x) for x in row] for row in group.L.G.rows],
            generators=[
                {"matrix": [list(r) for r in e.g.rows], "translation": [rational_str(x) for x in e.a]}
                for e in group.elements[1:]
            ],
            name=group.name or None,
        )


# Global loader instance
group_loader = GroupLoader()
