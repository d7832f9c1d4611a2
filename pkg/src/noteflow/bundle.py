"""Canonical bundle serialization and reconstruction.

Bundles are the engine's single output format: trace summary, graph, layout,
per-node profiles/facts/ranked recommendations and warnings. Serialization
is canonical (sorted keys, shortest round-trip floats, no NaN) so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .charts import spec_from_json, spec_to_json
from .errors import BundleFormatError
from .graph import FlowEdge, FlowGraph, FlowNode, NodeId, SteppedLayout
from .parser import StatementIR
from .trace import TraceResult
from .transforms import ColumnMap, TransformType

BUNDLE_VERSION = 1


def canonical_json_bytes(obj) -> bytes:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)
    return (text + "\n").encode("utf-8")


def _column_map_json(cmap: ColumnMap) -> dict:
    return {"pairs": [[a, b] for a, b in cmap.pairs],
            "added": list(cmap.added), "removed": list(cmap.removed)}


def _column_map_from_json(obj) -> ColumnMap:
    return ColumnMap(pairs=tuple((a, b) for a, b in obj.get("pairs", ())),
                     added=tuple(obj.get("added", ())),
                     removed=tuple(obj.get("removed", ())))


def _tag_json(tag) -> dict:
    out = {"reason": tag.reason}
    if tag.transform is not None:
        out["transform"] = tag.transform
        out["edge_epoch"] = tag.edge_epoch
        out["line"] = tag.line
    if tag.fact_kind is not None:
        out["fact_kind"] = tag.fact_kind
        out["score"] = tag.score
    return out


def build_bundle(analysis, embed_data: bool = False) -> dict:
    """Assemble the canonical bundle dict from an AnalysisResult."""
    from .trace import render_data

    nodes_json = []
    for node in sorted(analysis.graph.nodes.values(), key=lambda n: (n.epoch, str(n.id))):
        entry = analysis.manifest.get(node.id)
        nodes_json.append({
            "id": str(node.id), "variable": node.id.variable,
            "cell_exec": node.id.cell_exec, "line": node.id.line_id,
            "epoch": node.epoch, "has_snapshot": node.has_snapshot,
            "schema": list(node.schema), "is_display": node.is_display,
            "rows": entry.row_count if entry else None,
            "sampled": entry.sampled if entry else False,
        })

    edges_json = []
    for edge in sorted(analysis.graph.edges, key=lambda e: (str(e.src), str(e.dst))):
        edges_json.append({
            "src": str(edge.src), "dst": str(edge.dst),
            "transform": edge.transform.name,
            "is_target": edge.transform.is_target,
            "schema_changing": edge.transform.is_schema_changing,
            "column_map": _column_map_json(edge.column_map),
            "statement": {"epoch": edge.statement.cell_epoch,
                          "line": edge.statement.line_id,
                          "raw": edge.statement.raw},
        })

    per_node = {}
    for nid_str, info in sorted(analysis.per_node.items()):
        recs = []
        for rank_pos, rec in enumerate(info["recommendations"]):
            item = {"rank": rank_pos, "chart": spec_to_json(rec.chart),
                    "tags": [_tag_json(t) for t in rec.tags],
                    "rank_key": _rank_key_json(rec.rank_key)}
            if embed_data:
                snapshot = analysis.snapshots.get(nid_str)
                if snapshot is not None:
                    data = render_data(rec.chart, snapshot,
                                       scatter_cap=analysis.config.scatter_cap,
                                       seed=analysis.config.sample_seed)
                    item["data"] = [dict(row) for row in data.series]
            recs.append(item)
        per_node[nid_str] = {
            "profiles": [{
                "name": p.name, "dtype": p.dtype, "nulls": p.null_count,
                "distinct": p.distinct_count, "min": _finite(p.min_value),
                "max": _finite(p.max_value), "temporal": p.is_temporal,
                "categorical": p.is_categorical,
            } for p in info["profiles"]],
            "facts": [{
                "kind": f.kind, "columns": list(f.columns), "score": f.score,
            } for f in info["facts"]],
            "recommendations": recs,
        }

    executions = []
    for pe in analysis.executions:
        executions.append({
            "epoch": pe.epoch, "cell_pos": pe.cell_pos, "exec_count": pe.exec_count,
            "statements": [{
                "line": s.line_id, "raw": s.raw, "status": s.parse_status,
                "targets": list(s.targets), "display": s.display_expr,
            } for s in pe.statements],
        })

    return {
        "version": BUNDLE_VERSION,
        "notebook": analysis.notebook_path,
        "inputs": {"snapshots_dir": analysis.snapshots_dir,
                   "trace_log": analysis.trace_log_path},
        "trace": executions,
        "graph": {
            "nodes": nodes_json,
            "edges": edges_json,
            "columns": [[str(n) for n in col] for col in analysis.layout.columns],
            "version_links": [[str(a), str(b)] for a, b in analysis.layout.version_links],
        },
        "nodes": per_node,
        "warnings": sorted(analysis.warnings),
    }


def _rank_key_json(key) -> list:
    if key is None:
        return []
    head = list(key[:7])
    return head + list(key[7])


def _finite(value):
    if isinstance(value, float) and (value != value or value in (float("inf"), float("-inf"))):
        return None
    return value


def serialize_bundle(bundle: dict) -> bytes:
    return canonical_json_bytes(bundle)


def parse_bundle(data: bytes | str) -> dict:
    try:
        bundle = json.loads(data)
    except json.JSONDecodeError as exc:
        raise BundleFormatError(str(exc)) from exc
    if not isinstance(bundle, dict) or bundle.get("version") != BUNDLE_VERSION:
        raise BundleFormatError("not a bundle or unsupported version")
    for key in ("graph", "nodes", "trace"):
        if key not in bundle:
            raise BundleFormatError(f"bundle missing {key}")
    return bundle


def load_bundle(path) -> dict:
    with open(path, "rb") as fh:
        return parse_bundle(fh.read())


def bundle_graph(bundle: dict) -> FlowGraph:
    """Reconstruct the flow graph (enough of it to trace) from a bundle."""
    nodes = {}
    for item in bundle["graph"]["nodes"]:
        nid = NodeId.parse(item["id"])
        nodes[nid] = FlowNode(id=nid, epoch=item["epoch"],
                              has_snapshot=item["has_snapshot"],
                              schema=tuple(item["schema"]),
                              is_display=item.get("is_display", False))
    edges = []
    for item in bundle["graph"]["edges"]:
        stmt = StatementIR(cell_epoch=item["statement"]["epoch"],
                           line_id=item["statement"]["line"], targets=(),
                           calls=(), display_expr=False,
                           raw=item["statement"]["raw"], parse_status="parsed")
        edges.append(FlowEdge(
            src=NodeId.parse(item["src"]), dst=NodeId.parse(item["dst"]),
            transform=TransformType(item["transform"], item["is_target"],
                                    item["schema_changing"]),
            column_map=_column_map_from_json(item["column_map"]),
            statement=stmt))
    links = tuple((NodeId.parse(a), NodeId.parse(b))
                  for a, b in bundle["graph"]["version_links"])
    return FlowGraph(nodes=nodes, edges=tuple(edges), version_links=links)


def bundle_layout(bundle: dict) -> SteppedLayout:
    cols = tuple(tuple(NodeId.parse(n) for n in col)
                 for col in bundle["graph"]["columns"])
    links = tuple((NodeId.parse(a), NodeId.parse(b))
                  for a, b in bundle["graph"]["version_links"])
    return SteppedLayout(columns=cols, version_links=links)


def recommendation_spec(bundle: dict, node_id: str, chart_index: int):
    node_info = bundle["nodes"].get(node_id)
    if node_info is None:
        raise BundleFormatError(f"no recommendations for node {node_id}")
    recs = node_info["recommendations"]
    if not 0 <= chart_index < len(recs):
        raise BundleFormatError(
            f"chart index {chart_index} out of range for {node_id} (have {len(recs)})")
    return spec_from_json(recs[chart_index]["chart"])


def trace_result_json(result: TraceResult) -> dict:
    nodes = {}
    for nid, entry in sorted(result.per_node.items(), key=lambda kv: str(kv[0])):
        item = {"status": entry.status, "change": entry.change, "color": entry.color}
        if entry.spec is not None:
            item["chart"] = spec_to_json(entry.spec)
        if entry.data is not None:
            item["data"] = [dict(row) for row in entry.data.series]
        if entry.substitutions:
            item["substitutions"] = [
                {"from": a, "to": b, "edge": e} for a, b, e in entry.substitutions]
        if entry.reason is not None:
            item["reason"] = entry.reason
        nodes[str(nid)] = item
    return {"pinned_node": str(result.pinned_node),
            "chart": spec_to_json(result.pinned_spec),
            "nodes": nodes}
