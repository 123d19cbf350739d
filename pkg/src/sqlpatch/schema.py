"""Database schema model and loader for the Spider tables.json layout."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import SchemaError


@dataclass(frozen=True)
class SchemaInfo:
    db_id: str
    tables: tuple[str, ...]
    columns: dict[str, tuple[str, ...]] = field(default_factory=dict)
    foreign_keys: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if len(set(self.tables)) != len(self.tables):
            raise SchemaError(f"duplicate table names in schema {self.db_id!r}")
        for table in self.tables:
            if table not in self.columns:
                raise SchemaError(f"table {table!r} has no column list")

    def has_table(self, name: str) -> bool:
        return name in self.columns

    def has_column(self, table: str, column: str) -> bool:
        return column in self.columns.get(table, ())

    def tables_with_column(self, column: str) -> list[str]:
        return [t for t in self.tables if column in self.columns[t]]

    def serialize(self) -> str:
        """Flat text form: ``db_id | table : col, col | table : ...`` (lowercase)."""
        parts = [self.db_id.lower()]
        for table in self.tables:
            parts.append(f"{table} : " + ", ".join(self.columns[table]))
        return " | ".join(parts)


def schema_from_entry(entry: dict) -> SchemaInfo:
    """Build SchemaInfo from one tables.json object."""
    db_id = entry["db_id"]
    table_names = entry.get("table_names_original") or entry["table_names"]
    column_pairs = entry.get("column_names_original") or entry["column_names"]
    tables = tuple(t.lower() for t in table_names)
    columns: dict[str, list[str]] = {t: [] for t in tables}
    flat_cols: list[tuple[int, str]] = []
    for table_idx, col_name in column_pairs:
        flat_cols.append((table_idx, col_name.lower()))
        if table_idx < 0:  # the "*" pseudo-column
            continue
        if table_idx >= len(tables):
            raise SchemaError(f"column {col_name!r} references missing table index {table_idx}")
        columns[tables[table_idx]].append(col_name.lower())
    fks = []
    for col_idx, other_idx in entry.get("foreign_keys") or []:
        fks.append((_qualify(flat_cols, tables, col_idx),
                    _qualify(flat_cols, tables, other_idx)))
    return SchemaInfo(
        db_id=db_id,
        tables=tables,
        columns={t: tuple(cols) for t, cols in columns.items()},
        foreign_keys=tuple(fks),
    )


def _qualify(flat_cols, tables, idx):
    try:
        table_idx, col = flat_cols[idx]
    except IndexError:
        raise SchemaError(f"foreign key references missing column index {idx}") from None
    if table_idx < 0:
        raise SchemaError("foreign key references the * pseudo-column")
    return f"{tables[table_idx]}.{col}"


def load_tables_json(path) -> dict[str, SchemaInfo]:
    """Load a Spider-layout tables.json file into a db_id -> SchemaInfo map."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise SchemaError("tables.json must contain a JSON array of schema objects")
    store = {}
    for entry in data:
        info = schema_from_entry(entry)
        store[info.db_id] = info
    return store
