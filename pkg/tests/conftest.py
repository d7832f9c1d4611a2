import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noteflow.ingest import build_trace
from noteflow.pipeline import parse_trace
from noteflow.snapshots import ColumnDecl, ManifestEntry, SnapshotManifest
from noteflow.transforms import TransformRegistry


@pytest.fixture(scope="session")
def registry():
    return TransformRegistry.load()


def executions_from_cells(cell_sources, log=None):
    """Build ParsedExecutions from cell source strings (one string per cell)."""
    cells = [(pos, pos + 1, tuple(src.split("\n")))
             for pos, src in enumerate(cell_sources)]
    trace = build_trace(cells, log, notebook_path="<test>")
    return parse_trace(trace)


def fake_manifest(schemas: dict) -> SnapshotManifest:
    """In-memory manifest; schemas maps node-id -> list of column names or
    (name, dtype) pairs."""
    entries = {}
    for node_id, cols in schemas.items():
        decls = tuple(
            ColumnDecl(c, "float", 0) if isinstance(c, str) else ColumnDecl(c[0], c[1], 0)
            for c in cols)
        entries[node_id] = ManifestEntry(node_id=node_id, data_path="<memory>",
                                         row_count=0, sampled=False, schema=decls)
    return SnapshotManifest(root="<memory>", entries=entries)
