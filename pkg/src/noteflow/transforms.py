"""Transformation classification and input/output column mapping.

The taxonomy ships as a data file (transforms.json) so API coverage can be
extended without code changes: 30 transformation types of which 12 are
distribution-altering targets and 15 (plus the conservative unknown) may add
or delete columns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import RegistrySchemaError
from .parser import AtomicCall

TARGET_TYPE_COUNT = 12
SCHEMA_CHANGING_COUNT = 15
TYPE_COUNT = 30

_ARG_PATTERNS = frozenset({
    "str", "num", "bool", "none", "name", "str_list", "list", "dict",
    "slice", "compare", "expr",
})


@dataclass(frozen=True)
class TransformType:
    name: str
    is_target: bool
    is_schema_changing: bool


@dataclass(frozen=True)
class ColumnMap:
    """Input/output column correspondences for one transformation edge."""
    pairs: tuple[tuple[str, str], ...]
    added: tuple[str, ...] = ()
    removed: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def backward(self, column: str) -> str | None:
        for src, dst in self.pairs:
            if dst == column:
                return src
        return None

    def forward(self, column: str) -> str | None:
        for src, dst in self.pairs:
            if src == column:
                return dst
        return None


class TransformRegistry:
    """Immutable func-name -> transformation-type lookup with argument rules."""

    def __init__(self, entries: list[dict]):
        self._funcs: dict[str, dict] = {}
        types: dict[str, TransformType] = {}
        for entry in entries:
            func = entry.get("func")
            tname = entry.get("type")
            if not isinstance(func, str) or not isinstance(tname, str):
                raise RegistrySchemaError(f"bad entry: {entry!r}")
            ttype = TransformType(tname, bool(entry.get("is_target")),
                                  bool(entry.get("schema_changing")))
            if tname in types and types[tname] != ttype:
                raise RegistrySchemaError(f"type {tname} has inconsistent flags")
            types[tname] = ttype
            for rule in entry.get("arg_rules", ()):
                if rule.get("pattern") not in _ARG_PATTERNS:
                    raise RegistrySchemaError(f"bad arg pattern in {func}: {rule!r}")
            if func != "__default__":
                if func in self._funcs:
                    raise RegistrySchemaError(f"duplicate func {func}")
                self._funcs[func] = entry
        if "unknown" not in types:
            raise RegistrySchemaError("registry must define the unknown type")
        unknown = types["unknown"]
        if unknown.is_target or not unknown.is_schema_changing:
            raise RegistrySchemaError("unknown must be non-target and schema-changing")
        if len(types) != TYPE_COUNT:
            raise RegistrySchemaError(f"expected {TYPE_COUNT} types, found {len(types)}")
        targets = sum(1 for t in types.values() if t.is_target)
        if targets != TARGET_TYPE_COUNT:
            raise RegistrySchemaError(f"expected {TARGET_TYPE_COUNT} target types, found {targets}")
        changing = sum(1 for t in types.values()
                       if t.is_schema_changing and t.name != "unknown")
        if changing != SCHEMA_CHANGING_COUNT:
            raise RegistrySchemaError(
                f"expected {SCHEMA_CHANGING_COUNT} schema-changing types, found {changing}")
        self.types = types
        self.unknown = unknown

    @classmethod
    def load(cls, path: str | None = None) -> "TransformRegistry":
        if path is None:
            text = resources.files("noteflow.data").joinpath("transforms.json").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        try:
            entries = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RegistrySchemaError(str(exc)) from exc
        if not isinstance(entries, list):
            raise RegistrySchemaError("registry must be a JSON array")
        return cls(entries)

    def classify(self, call: AtomicCall) -> TransformType:
        entry = self._funcs.get(call.func_name)
        if entry is None:
            return self.unknown
        kind = call.args[0].kind if call.args else None
        for rule in entry.get("arg_rules", ()):
            if rule["pattern"] == kind:
                return self.types[rule["type"]]
        return self.types[entry["type"]]

    def reduce_chain(self, calls) -> TransformType:
        """Label a whole statement chain with a single transformation type.

        Last target operation wins, except that a write-back setitem defers
        to an earlier target (`df['a'] = df['a'].fillna(0)` is a fill, not a
        mutate); then last non-unknown schema-changing, then last known type.
        """
        classified = [(c, self.classify(c)) for c in calls]
        targets = [(c, t) for c, t in classified if t.is_target]
        if targets:
            preferred = [t for c, t in targets if c.func_name != "setitem"]
            return preferred[-1] if preferred else targets[-1][1]
        for _, t in reversed(classified):
            if t.is_schema_changing and t.name != "unknown":
                return t
        for _, t in reversed(classified):
            if t.name not in ("unknown", "display"):
                return t
        for _, t in reversed(classified):
            if t.name == "display":
                return t
        return self.unknown


def derive_column_map(ttype: TransformType, call: AtomicCall,
                      in_schema, out_schema) -> ColumnMap:
    """Column correspondences induced by a single call between two schemas."""
    return derive_statement_map(ttype, (call,), in_schema, out_schema)


def derive_statement_map(ttype: TransformType, calls,
                         in_schema, out_schema) -> ColumnMap:
    """Column correspondences for an edge, using every chain call's refs.

    Non-schema-changing types yield the identity bijection on the input
    schema; schema-changing types pair carried-over columns identically and
    apply per-type rules (rename dictionaries, single-source new columns,
    merge consumption) with a schema-diff fallback for the rest.
    """
    in_s = [c for c in (in_schema or ())]
    out_s = [c for c in (out_schema or ())]
    in_set, out_set = set(in_s), set(out_s)
    warnings: list[str] = []

    if not ttype.is_schema_changing:
        if in_set == out_set:
            return ColumnMap(pairs=tuple((c, c) for c in in_s), added=(), removed=())
        warnings.append(f"schema changed across non-schema-changing {ttype.name} edge")
        pairs = tuple((c, c) for c in in_s if c in out_set)
        return ColumnMap(pairs=pairs,
                         added=tuple(c for c in out_s if c not in in_set),
                         removed=tuple(c for c in in_s if c not in out_set),
                         warnings=tuple(warnings))

    pairs: list[tuple[str, str]] = [(c, c) for c in in_s if c in out_set]
    new_cols = [c for c in out_s if c not in in_set]
    gone_cols = [c for c in in_s if c not in out_set]
    refs: list[str] = []
    for c in calls:
        for r in c.column_refs:
            if r not in refs:
                refs.append(r)

    rule_pairs: list[tuple[str, str]] = []
    if ttype.name == "rename":
        mapping = _rename_mapping(calls)
        for old, new in mapping.items():
            if old in gone_cols and new in new_cols:
                rule_pairs.append((old, new))
    elif ttype.name in ("mutate", "extract", "separate", "assign"):
        sources = [r for r in refs if r in in_set and r not in new_cols]
        if len(sources) == 1:
            rule_pairs.extend((sources[0], c) for c in new_cols)
        elif len(sources) > 1 and new_cols:
            warnings.append(
                f"ambiguous sources {sources} for new columns {new_cols}; left unmapped")
    elif ttype.name == "merge":
        consumed = [r for r in refs if r in gone_cols]
        if len(new_cols) == 1 and consumed:
            rule_pairs.extend((c, new_cols[0]) for c in consumed)

    # Drop rule pairs that give one output column several sources.
    by_dst: dict[str, list[str]] = {}
    for src, dst in rule_pairs:
        by_dst.setdefault(dst, []).append(src)
    if ttype.name != "merge":
        for dst, srcs in list(by_dst.items()):
            if len(srcs) > 1:
                warnings.append(f"conflicting mappings for column {dst}; left unmapped")
                del by_dst[dst]
        rule_pairs = [(src, dst) for src, dst in rule_pairs if dst in by_dst]

    mapped_dst = {dst for _, dst in rule_pairs}
    mapped_src = {src for src, _ in rule_pairs}
    added = tuple(c for c in new_cols if c not in mapped_dst)
    removed = tuple(c for c in gone_cols if c not in mapped_src)
    return ColumnMap(pairs=tuple(pairs + rule_pairs), added=added,
                     removed=removed, warnings=tuple(warnings))


def _rename_mapping(calls) -> dict[str, str]:
    for call in calls:
        if call.func_name != "rename":
            continue
        val = call.kwarg("columns")
        if val is None and call.args:
            val = call.args[0]
        if val is not None and val.kind == "dict" and val.value:
            return dict(val.value)
    return {}
