"""Execute a notebook statement by statement and snapshot dataframe states.

The harness shares no code with the analysis engine; it targets the same
file contracts: snapshot CSVs with a manifest.json sidecar, node ids named
"{variable}_C{exec_count}_L{line}", and a trace.json execution log.
Only pandas DataFrames are captured; a value is re-snapshotted when its
content hash (schema plus cell values) changes.
"""

from __future__ import annotations

import ast
import hashlib
import json
import os
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

NULL_SENTINEL = "\x00NULL"


@dataclass
class CaptureConfig:
    notebook: Path
    out_dir: Path
    sample_cap: int = 10000
    seed: int = 42
    variables: list[str] | None = None
    replay: list | None = None

    def __post_init__(self):
        if self.sample_cap < 1:
            raise ValueError("sample_cap must be >= 1")
        # capture() runs from the notebook's directory; keep paths absolute
        self.notebook = Path(self.notebook).resolve()
        self.out_dir = Path(self.out_dir).resolve()


@dataclass
class CaptureResult:
    entries: dict
    log: list
    errors: list = field(default_factory=list)


def load_code_cells(path: Path):
    doc = json.loads(path.read_text(encoding="utf-8"))
    cells = []
    for pos, cell in enumerate(doc.get("cells", [])):
        if cell.get("cell_type") != "code":
            continue
        source = cell.get("source", "")
        if isinstance(source, list):
            source = "".join(source)
        cells.append((pos, source))
    return cells


def load_replay(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def dtype_name(series) -> str:
    if pd.api.types.is_bool_dtype(series):
        return "bool"
    if pd.api.types.is_integer_dtype(series):
        return "int"
    if pd.api.types.is_float_dtype(series):
        return "float"
    if pd.api.types.is_datetime64_any_dtype(series):
        return "datetime"
    return "string"


def _cell_value(v, dtype):
    if v is None or (isinstance(v, float) and v != v):
        return None
    try:
        if pd.isna(v):
            return None
    except (TypeError, ValueError):
        pass
    if dtype == "int":
        return int(v)
    if dtype == "float":
        f = float(v)
        return f if f == f and abs(f) != float("inf") else None
    if dtype == "bool":
        return bool(v)
    if dtype == "datetime":
        return pd.Timestamp(v).isoformat()
    return str(v)


@dataclass
class Snapshot:
    schema: list          # (name, dtype, nulls)
    columns: list         # column-major python values, None for null
    row_count: int        # true row count before sampling
    sampled: bool


def snapshot_frame(df: pd.DataFrame, sample_cap: int, seed: int) -> Snapshot:
    total = len(df)
    sampled = total > sample_cap
    if sampled:
        rng = np.random.RandomState(seed)
        idx = np.sort(rng.choice(total, size=sample_cap, replace=False))
        df = df.iloc[idx]
    schema, columns = [], []
    for name in df.columns:
        series = df[name]
        dtype = dtype_name(series)
        values = [_cell_value(v, dtype) for v in series.tolist()]
        schema.append((str(name), dtype, sum(1 for v in values if v is None)))
        columns.append(values)
    return Snapshot(schema=schema, columns=columns, row_count=total, sampled=sampled)


def content_hash(df: pd.DataFrame, sample_cap: int, seed: int) -> str:
    snap = snapshot_frame(df, sample_cap, seed)
    payload = repr([(n, d) for n, d, _ in snap.schema]) + repr(snap.columns)
    return hashlib.sha256(payload.encode()).hexdigest()


def root_variable(expr):
    node = expr
    while True:
        if isinstance(node, ast.Call):
            node = node.func
        elif isinstance(node, (ast.Attribute, ast.Subscript)):
            node = node.value
        elif isinstance(node, ast.Name):
            return node.id
        else:
            return None


def run_and_capture(config: CaptureConfig) -> CaptureResult:
    """Execute the notebook and collect snapshots plus the execution log.

    Cells run in document order, or per the replay file (a JSON array of
    cell positions, or objects {"cell_pos": int, "source": str|[str]} when a
    re-run carries edited source). A cell that raises is recorded with its
    error; later cells still run.
    """
    cells = load_code_cells(config.notebook)
    by_pos = dict(cells)
    if config.replay is None:
        order = [(pos, src) for pos, src in cells]
    else:
        order = []
        for item in config.replay:
            if isinstance(item, dict):
                src = item.get("source", by_pos[item["cell_pos"]])
                if isinstance(src, list):
                    src = "".join(line if line.endswith("\n") else line + "\n"
                                  for line in src).rstrip("\n")
                order.append((item["cell_pos"], src))
            else:
                order.append((item, by_pos[item]))

    ns: dict = {}
    hashes: dict[str, str] = {}
    entries: dict[str, Snapshot] = {}
    log, errors = [], []
    for epoch, (cell_pos, source) in enumerate(order, start=1):
        record = {"epoch": epoch, "cell_pos": cell_pos, "exec_count": epoch,
                  "source": source.split("\n")}
        log.append(record)
        try:
            tree = ast.parse(source)
        except SyntaxError as exc:
            record["error"] = f"SyntaxError: {exc}"
            errors.append(record["error"])
            continue
        for i, stmt in enumerate(tree.body):
            display_value = None
            try:
                if isinstance(stmt, ast.Expr) and i == len(tree.body) - 1:
                    display_value = eval(
                        compile(ast.Expression(stmt.value), str(config.notebook), "eval"), ns)
                else:
                    exec(compile(ast.Module([stmt], type_ignores=[]),
                                 str(config.notebook), "exec"), ns)
            except Exception as exc:
                record["error"] = f"{type(exc).__name__}: {exc}"
                errors.append(f"cell {cell_pos} line {stmt.lineno}: {record['error']}")
                break
            _collect(ns, hashes, entries, epoch, stmt.lineno, config)
            if isinstance(display_value, pd.DataFrame):
                var = root_variable(stmt.value)
                if var is not None and _wanted(var, config):
                    node_id = f"{var}_C{epoch}_L{stmt.lineno}"
                    entries[node_id] = snapshot_frame(
                        display_value, config.sample_cap, config.seed)
    return CaptureResult(entries=entries, log=log, errors=errors)


def _wanted(name: str, config: CaptureConfig) -> bool:
    return config.variables is None or name in config.variables


def _collect(ns, hashes, entries, epoch, line, config):
    for name, value in list(ns.items()):
        if not isinstance(value, pd.DataFrame) or not _wanted(name, config):
            continue
        digest = content_hash(value, config.sample_cap, config.seed)
        if hashes.get(name) == digest:
            continue
        hashes[name] = digest
        entries[f"{name}_C{epoch}_L{line}"] = snapshot_frame(
            value, config.sample_cap, config.seed)


# ---------------------------------------------------------------------------
# Output in the engine's snapshot-directory format

def _format_cell(value, dtype: str) -> str:
    if value is None:
        return NULL_SENTINEL if dtype == "string" else ""
    if dtype == "bool":
        return "true" if value else "false"
    if dtype == "float":
        return repr(float(value))
    if dtype == "int":
        return str(int(value))
    text = str(value)
    if dtype == "string" and text.startswith("\x00"):
        return "\x00" + text
    return text


def _escape(value: str) -> str:
    if any(ch in value for ch in (',', '"', '\r', '\n')):
        return '"' + value.replace('"', '""') + '"'
    return value


def write_outputs(result: CaptureResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"version": 1, "entries": {}}
    for node_id, snap in sorted(result.entries.items()):
        lines = [",".join(_escape(n) for n, _, _ in snap.schema)]
        n_rows = len(snap.columns[0]) if snap.columns else 0
        for r in range(n_rows):
            lines.append(",".join(
                _escape(_format_cell(col[r], dtype))
                for col, (_, dtype, _) in zip(snap.columns, snap.schema)))
        (out_dir / f"{node_id}.csv").write_text("\n".join(lines) + "\n",
                                                encoding="utf-8", newline="")
        manifest["entries"][node_id] = {
            "data": f"{node_id}.csv", "rows": snap.row_count, "sampled": snap.sampled,
            "schema": [{"name": n, "dtype": d, "nulls": nulls}
                       for n, d, nulls in snap.schema],
        }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True), encoding="utf-8")
    (out_dir / "trace.json").write_text(
        json.dumps(result.log, indent=1), encoding="utf-8")


def capture(config: CaptureConfig) -> CaptureResult:
    """Run the notebook from its own directory and write the snapshot dir."""
    cwd = os.getcwd()
    os.chdir(config.notebook.parent or Path("."))
    try:
        result = run_and_capture(config)
    finally:
        os.chdir(cwd)
    write_outputs(result, config.out_dir)
    return result
