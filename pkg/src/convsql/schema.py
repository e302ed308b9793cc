"""Database schemas: catalog loading and flat-text serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from convsql.errors import SchemaFormatError


@dataclass(frozen=True)
class Column:
    name: str
    declared_type: str | None = None


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass(frozen=True)
class DatabaseSchema:
    db_id: str
    tables: tuple[Table, ...]
    _by_name: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        by_name = {t.name.lower(): t for t in self.tables}
        object.__setattr__(self, "_by_name", by_name)

    def has_table(self, name: str) -> bool:
        return name.lower() in self._by_name

    def table(self, name: str) -> Table:
        return self._by_name[name.lower()]

    def has_column(self, table: str, column: str) -> bool:
        t = self._by_name.get(table.lower())
        if t is None:
            return False
        return column.lower() in (c.name.lower() for c in t.columns)

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]


def load_schemas(path: str | Path) -> dict[str, DatabaseSchema]:
    """Load a Spider-format ``tables.json`` catalog.

    Each entry carries ``db_id``, ``table_names_original`` and
    ``column_names_original`` as ``[table_index, name]`` pairs.  The synthetic
    all-tables ``*`` column (table index -1) is dropped: star is an AST
    concept, not a schema column.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise SchemaFormatError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise SchemaFormatError(f"expected a JSON array in {path}")

    out: dict[str, DatabaseSchema] = {}
    for entry in raw:
        db_id = entry.get("db_id")
        if not db_id:
            raise SchemaFormatError("catalog entry without db_id")
        table_names = entry.get("table_names_original")
        column_pairs = entry.get("column_names_original")
        if table_names is None or column_pairs is None:
            raise SchemaFormatError(
                "missing table_names_original/column_names_original", db_id=db_id
            )
        types = entry.get("column_types") or [None] * len(column_pairs)
        columns_per_table: list[list[Column]] = [[] for _ in table_names]
        for pair, ctype in zip(column_pairs, types):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise SchemaFormatError(f"malformed column entry {pair!r}", db_id=db_id)
            table_idx, col_name = pair
            if not isinstance(table_idx, int) or isinstance(table_idx, bool):
                raise SchemaFormatError(f"malformed column entry {pair!r}", db_id=db_id)
            if table_idx == -1:
                continue  # the synthetic "*" column
            if not 0 <= table_idx < len(table_names):
                raise SchemaFormatError(
                    f"column {col_name!r} references table index {table_idx} "
                    f"of a {len(table_names)}-table database",
                    db_id=db_id,
                )
            columns_per_table[table_idx].append(Column(name=col_name, declared_type=ctype))
        tables = []
        for name, cols in zip(table_names, columns_per_table):
            if not cols:
                raise SchemaFormatError(f"table {name!r} has no columns", db_id=db_id)
            tables.append(Table(name=name, columns=tuple(cols)))
        if not tables:
            raise SchemaFormatError("database has no tables", db_id=db_id)
        lowered = [t.name.lower() for t in tables]
        if len(set(lowered)) != len(lowered):
            raise SchemaFormatError("duplicate table names", db_id=db_id)
        out[db_id] = DatabaseSchema(db_id=db_id, tables=tuple(tables))
    return out


def serialize_schema(schema: DatabaseSchema) -> str:
    """Flatten a schema to ``table , col , col , table , col ...`` text.

    Tables appear in catalog order, each followed by its columns; everything
    lowercase.  Deterministic across calls and runs.
    """
    parts: list[str] = []
    for table in schema.tables:
        parts.append(table.name.lower())
        parts.extend(c.name.lower() for c in table.columns)
    return " , ".join(parts)
