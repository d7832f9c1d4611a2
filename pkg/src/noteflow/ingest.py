"""Notebook loading and execution-trace construction.

A trace orders cell executions by epoch. In log mode the epochs follow the
capture log (re-runs appear as later entries, possibly with edited source);
in static mode they follow the notebook's displayed execution counters,
which cannot recover overwritten history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import MalformedNotebook, TraceCellMismatch


@dataclass(frozen=True)
class CellExecution:
    epoch: int                      # 1-based, strictly increasing across the session
    cell_pos: int                   # index of the cell in the document (all cells)
    exec_count: int                 # the notebook's displayed execution counter
    source_lines: tuple[str, ...]


@dataclass(frozen=True)
class ExecutionTrace:
    executions: tuple[CellExecution, ...]
    notebook_path: str


def _split_source(source) -> tuple[str, ...]:
    if isinstance(source, str):
        text = source
    else:
        # elements may carry nbformat trailing newlines or be bare lines
        text = "\n".join(part.rstrip("\r\n") for part in source)
    return tuple(line.rstrip("\r\n") for line in text.splitlines()) or ("",)


def load_notebook(path: str | Path) -> list[tuple[int, int | None, tuple[str, ...]]]:
    """Read a notebook JSON document and return its code cells.

    Returns (cell_pos, exec_count, source_lines) triples in document order,
    where cell_pos indexes into the full cells array (markdown included).
    An empty notebook yields an empty list.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedNotebook(f"{path}: {exc}") from exc
    cells = doc.get("cells") if isinstance(doc, dict) else None
    if not isinstance(cells, list):
        raise MalformedNotebook(f"{path}: missing cells array")
    out = []
    for pos, cell in enumerate(cells):
        if not isinstance(cell, dict) or cell.get("cell_type") != "code":
            continue
        out.append((pos, cell.get("execution_count"), _split_source(cell.get("source", ""))))
    return out


def build_trace(cells, trace_log=None, notebook_path: str = "") -> ExecutionTrace:
    """Order cell executions into an ExecutionTrace.

    With a log, one CellExecution per entry in log order (epochs 1..N); each
    entry's recorded source wins over the document's, since re-runs may have
    executed pre-edit code. Without a log, cells are ordered by ascending
    execution counter and never-executed cells are dropped.
    """
    by_pos = {pos: (count, lines) for pos, count, lines in cells}
    executions = []
    if trace_log is not None:
        for i, entry in enumerate(trace_log):
            pos = entry["cell_pos"]
            if pos not in by_pos:
                raise TraceCellMismatch(f"log entry {i} references unknown cell_pos {pos}")
            source = entry.get("source")
            lines = _split_source(source) if source is not None else by_pos[pos][1]
            executions.append(CellExecution(
                epoch=i + 1,
                cell_pos=pos,
                exec_count=int(entry["exec_count"]),
                source_lines=lines,
            ))
    else:
        ran = [(count, pos, lines) for pos, count, lines in cells if count is not None]
        ran.sort(key=lambda t: (t[0], t[1]))
        for i, (count, pos, lines) in enumerate(ran):
            executions.append(CellExecution(
                epoch=i + 1, cell_pos=pos, exec_count=int(count), source_lines=lines,
            ))
    return ExecutionTrace(executions=tuple(executions), notebook_path=str(notebook_path))


def load_trace_log(path: str | Path) -> list[dict]:
    """Read a trace.json execution log (array of epoch/cell_pos/exec_count/source)."""
    try:
        with open(path, encoding="utf-8") as fh:
            log = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedNotebook(f"{path}: {exc}") from exc
    if not isinstance(log, list):
        raise MalformedNotebook(f"{path}: trace log must be a JSON array")
    return log
