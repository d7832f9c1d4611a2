"""Snapshot manifests, CSV table I/O and per-column profiling.

Snapshots are RFC 4180 CSV files with a JSON sidecar schema carried in
manifest.json (CSV alone cannot express dtypes or null-vs-empty-string).
The stdlib csv module rejects NUL bytes entirely, so the reader/writer here
is hand-rolled; it must stay byte-stable because bundle determinism and the
capture harness both depend on it.

Null encoding: non-string columns write null as the empty field; string
columns write null as the reserved sentinel U+0000 "NULL" and escape data
values starting with U+0000 by doubling the leading NUL.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path

from .errors import ManifestSchemaError, MissingManifest

NULL_SENTINEL = "\x00NULL"
DTYPES = ("int", "float", "string", "bool", "datetime")
CATEGORICAL_CAP = 20
TEMPORAL_THRESHOLD = 0.95


@dataclass(frozen=True)
class ColumnDecl:
    name: str
    dtype: str
    null_count: int


@dataclass(frozen=True)
class TableSnapshot:
    columns: tuple[ColumnDecl, ...]
    cells: tuple[tuple, ...]        # column-major; None marks null
    row_count: int

    def column(self, name: str):
        for decl, values in zip(self.columns, self.cells):
            if decl.name == name:
                return decl, values
        raise KeyError(name)

    @property
    def schema(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)


@dataclass(frozen=True)
class ManifestEntry:
    node_id: str
    data_path: str
    row_count: int
    sampled: bool
    schema: tuple[ColumnDecl, ...]


@dataclass(frozen=True)
class SnapshotManifest:
    root: str
    entries: dict
    warnings: tuple[str, ...] = ()

    def __contains__(self, node_id) -> bool:
        return str(node_id) in self.entries

    def get(self, node_id) -> ManifestEntry | None:
        return self.entries.get(str(node_id))

    def schema_of(self, node_id) -> tuple[str, ...]:
        entry = self.get(node_id)
        return tuple(c.name for c in entry.schema) if entry else ()


@dataclass(frozen=True)
class ColumnProfile:
    name: str
    dtype: str
    null_count: int
    distinct_count: int
    min_value: object
    max_value: object
    is_temporal: bool
    is_categorical: bool


# ---------------------------------------------------------------------------
# RFC 4180 reading/writing

def _escape_field(value: str) -> str:
    if any(ch in value for ch in (',', '"', '\r', '\n')):
        return '"' + value.replace('"', '""') + '"'
    return value


def _split_record(line: str) -> list[str] | None:
    """Parse one CSV record; returns None when a quoted field is unterminated."""
    fields, buf, i, n = [], [], 0, len(line)
    in_quotes = False
    while i < n:
        ch = line[i]
        if in_quotes:
            if ch == '"':
                if i + 1 < n and line[i + 1] == '"':
                    buf.append('"')
                    i += 1
                else:
                    in_quotes = False
            else:
                buf.append(ch)
        elif ch == '"':
            in_quotes = True
        elif ch == ',':
            fields.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    if in_quotes:
        return None
    fields.append("".join(buf))
    return fields


def _read_records(text: str) -> list[list[str]]:
    records, pending = [], ""
    for line in text.split("\n"):
        pending = pending + "\n" + line if pending else line
        rec = _split_record(pending)
        if rec is None:
            continue
        records.append(rec)
        pending = ""
    if pending:
        raise ValueError("unterminated quoted field")
    if records and records[-1] == [""]:
        records.pop()
    return records


def format_cell(value, dtype: str) -> str:
    if value is None:
        return NULL_SENTINEL if dtype == "string" else ""
    if dtype == "bool":
        return "true" if value else "false"
    if dtype == "float":
        value = float(value)
        return repr(value) if value == value and abs(value) != float("inf") else ""
    if dtype == "int":
        return str(int(value))
    text = str(value)
    if dtype == "string" and text.startswith("\x00"):
        return "\x00" + text  # keep data distinguishable from the null sentinel
    return text


def parse_cell(text: str, dtype: str):
    if dtype == "string":
        if text == NULL_SENTINEL:
            return None
        if text.startswith("\x00"):
            return text[1:]
        return text
    if text == "":
        return None
    if dtype == "int":
        return int(text)
    if dtype == "float":
        value = float(text)
        if value != value or abs(value) == float("inf"):
            raise ValueError(f"non-finite float cell {text!r}")
        return value
    if dtype == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"bad bool cell {text!r}")
        return text == "true"
    return text  # datetime values stay ISO strings


def write_snapshot_csv(path, snapshot: TableSnapshot) -> None:
    lines = [",".join(_escape_field(c.name) for c in snapshot.columns)]
    for row in range(snapshot.row_count):
        lines.append(",".join(
            _escape_field(format_cell(values[row], decl.dtype))
            for decl, values in zip(snapshot.columns, snapshot.cells)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def read_snapshot_csv(path, schema: tuple[ColumnDecl, ...]) -> TableSnapshot:
    text = Path(path).read_text(encoding="utf-8")
    records = _read_records(text)
    if not records:
        raise ValueError("missing header row")
    header = records[0]
    names = [c.name for c in schema]
    if header != names:
        raise ValueError(f"header {header!r} does not match schema {names!r}")
    columns = [[] for _ in schema]
    for rec in records[1:]:
        if len(rec) != len(schema):
            raise ValueError(f"row has {len(rec)} fields, expected {len(schema)}")
        for col, cell, decl in zip(columns, rec, schema):
            col.append(parse_cell(cell, decl.dtype))
    rows = len(records) - 1
    decls = tuple(ColumnDecl(c.name, c.dtype, sum(1 for v in col if v is None))
                  for c, col in zip(schema, columns))
    return TableSnapshot(columns=decls, cells=tuple(tuple(c) for c in columns),
                         row_count=rows)


# ---------------------------------------------------------------------------
# Manifest

def load_manifest(directory) -> SnapshotManifest:
    """Load and validate manifest.json; invalid entries drop with warnings."""
    root = Path(directory)
    path = root / "manifest.json"
    if not path.is_file():
        raise MissingManifest(str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestSchemaError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), dict):
        raise ManifestSchemaError(f"{path}: expected an object with entries")
    if doc.get("version") != 1:
        raise ManifestSchemaError(f"{path}: unsupported version {doc.get('version')!r}")

    entries: dict[str, ManifestEntry] = {}
    warnings: list[str] = []
    for node_id, raw in sorted(doc["entries"].items()):
        try:
            entry = _validate_entry(root, node_id, raw)
        except (KeyError, TypeError, ValueError, OSError) as exc:
            warnings.append(f"dropped snapshot entry {node_id}: {exc}")
            continue
        entries[node_id] = entry
    return SnapshotManifest(root=str(root), entries=entries, warnings=tuple(warnings))


def _validate_entry(root: Path, node_id: str, raw: dict) -> ManifestEntry:
    schema = tuple(ColumnDecl(col["name"], col["dtype"], int(col.get("nulls", 0)))
                   for col in raw["schema"])
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise ValueError("duplicate column names")
    for col in schema:
        if col.dtype not in DTYPES:
            raise ValueError(f"unknown dtype {col.dtype!r}")
    data_path = root / raw["data"]
    snapshot = read_snapshot_csv(data_path, schema)
    declared_rows = int(raw["rows"])
    sampled = bool(raw.get("sampled", False))
    if not sampled and snapshot.row_count != declared_rows:
        raise ValueError(f"row count mismatch: manifest {declared_rows}, csv {snapshot.row_count}")
    return ManifestEntry(node_id=node_id, data_path=str(data_path),
                         row_count=declared_rows, sampled=sampled, schema=schema)


def load_snapshot(manifest: SnapshotManifest, node_id) -> TableSnapshot | None:
    entry = manifest.get(node_id)
    if entry is None:
        return None
    return read_snapshot_csv(entry.data_path, entry.schema)


# ---------------------------------------------------------------------------
# Profiling

def _parses_as_date(value: str) -> bool:
    if not isinstance(value, str) or len(value) < 8 or not value[:4].isdigit():
        return False
    probe = value[:-1] + "+00:00" if value.endswith("Z") else value
    for parser in (datetime.fromisoformat, date.fromisoformat):
        try:
            parser(probe)
            return True
        except ValueError:
            continue
    return False


def profile(snapshot: TableSnapshot) -> list[ColumnProfile]:
    """One order-free profile per column."""
    out = []
    for decl, values in zip(snapshot.columns, snapshot.cells):
        present = [v for v in values if v is not None]
        distinct = len(set(present))
        if present:
            if decl.dtype in ("int", "float"):
                lo, hi = min(present), max(present)
            else:
                as_str = [str(v) for v in present]
                lo, hi = min(as_str), max(as_str)
        else:
            lo = hi = None
        if decl.dtype == "datetime":
            temporal = True
        elif decl.dtype == "string" and present:
            hits = sum(1 for v in present if _parses_as_date(v))
            temporal = hits / len(present) >= TEMPORAL_THRESHOLD
        else:
            temporal = False
        categorical = decl.dtype in ("string", "bool") or distinct <= CATEGORICAL_CAP
        out.append(ColumnProfile(
            name=decl.name, dtype=decl.dtype, null_count=decl.null_count,
            distinct_count=distinct, min_value=lo, max_value=hi,
            is_temporal=temporal, is_categorical=categorical))
    return out
