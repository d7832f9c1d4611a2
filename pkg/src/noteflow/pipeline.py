"""End-to-end analysis: ingest, parse, graph, profile, mine, recommend."""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import EngineConfig
from .errors import AllNullColumn
from .facts import mine_node_facts
from .graph import (FlowGraph, ParsedExecution, SteppedLayout, assign_stepped_layout,
                    build_graph)
from .ingest import ExecutionTrace, build_trace, load_notebook, load_trace_log
from .parser import parse_statement, split_statements
from .recommend import recommend_for_node
from .snapshots import SnapshotManifest, load_manifest, load_snapshot, profile
from .transforms import TransformRegistry


@dataclass
class AnalysisResult:
    notebook_path: str
    snapshots_dir: str
    trace_log_path: str | None
    trace: ExecutionTrace
    executions: list[ParsedExecution]
    graph: FlowGraph
    layout: SteppedLayout
    manifest: SnapshotManifest
    snapshots: dict
    per_node: dict
    warnings: list[str]
    config: EngineConfig


def parse_trace(trace: ExecutionTrace) -> list[ParsedExecution]:
    out = []
    for execution in trace.executions:
        statements = tuple(
            parse_statement(raw, execution.epoch, line_id)
            for line_id, raw in split_statements(execution.source_lines))
        out.append(ParsedExecution(epoch=execution.epoch, cell_pos=execution.cell_pos,
                                   exec_count=execution.exec_count, statements=statements))
    return out


def analyze(notebook_path, snapshots_dir, trace_log_path=None,
            config: EngineConfig | None = None,
            registry: TransformRegistry | None = None) -> AnalysisResult:
    config = config or EngineConfig()
    registry = registry or TransformRegistry.load(config.registry_path)

    cells = load_notebook(notebook_path)
    log = load_trace_log(trace_log_path) if trace_log_path else None
    trace = build_trace(cells, log, notebook_path=str(notebook_path))
    executions = parse_trace(trace)

    manifest = load_manifest(snapshots_dir)
    warnings = list(manifest.warnings)

    graph = build_graph(executions, manifest, registry)
    layout = assign_stepped_layout(graph, executions)
    graph = graph.with_version_links(layout.version_links)

    snapshots = {}
    per_node = {}
    for node in sorted(graph.nodes.values(), key=lambda n: (n.epoch, str(n.id))):
        nid = str(node.id)
        if not node.has_snapshot:
            per_node[nid] = {"profiles": [], "facts": [], "recommendations": []}
            continue
        snapshot = load_snapshot(manifest, nid)
        snapshots[nid] = snapshot
        profiles = profile(snapshot)
        try:
            dist, corr, trend = mine_node_facts(
                snapshot, profiles, node=nid, threshold=config.fact_threshold,
                pair_cap=config.numeric_pair_cap)
        except AllNullColumn as exc:
            warnings.append(f"{nid}: all-null column {exc}")
            dist, corr, trend = [], [], []
        in_edges = graph.in_edges(node.id)
        recs = recommend_for_node(node.id, in_edges, dist, corr, trend, profiles,
                                  registry, cap=config.candidate_cap)
        per_node[nid] = {
            "profiles": profiles,
            "facts": [f for f, _ in dist] + corr + trend,
            "recommendations": recs,
        }

    return AnalysisResult(
        notebook_path=str(notebook_path), snapshots_dir=str(snapshots_dir),
        trace_log_path=str(trace_log_path) if trace_log_path else None,
        trace=trace, executions=executions, graph=graph, layout=layout,
        manifest=manifest, snapshots=snapshots, per_node=per_node,
        warnings=warnings, config=config)
