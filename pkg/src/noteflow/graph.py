"""Flow-graph construction, stepped layout and relatedness queries.

Nodes are snapshots of a variable's state at one executed statement, not the
variable itself: reassigning a table yields a fresh node linked by an edge.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .errors import UnknownNode
from .parser import RESULT, StatementIR, referenced_variables
from .snapshots import SnapshotManifest
from .transforms import ColumnMap, TransformRegistry, TransformType, derive_statement_map

_NODE_ID_RE = re.compile(r"^(?P<var>.+)_C(?P<cell>\d+)_L(?P<line>\d+)$")


@dataclass(frozen=True, order=True)
class NodeId:
    variable: str
    cell_exec: int
    line_id: int

    def __str__(self) -> str:
        return f"{self.variable}_C{self.cell_exec}_L{self.line_id}"

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        m = _NODE_ID_RE.match(text)
        if not m:
            raise ValueError(f"not a node id: {text!r}")
        return cls(m.group("var"), int(m.group("cell")), int(m.group("line")))


@dataclass(frozen=True)
class FlowNode:
    id: NodeId
    epoch: int
    has_snapshot: bool
    schema: tuple[str, ...]
    is_display: bool = False


@dataclass(frozen=True)
class FlowEdge:
    src: NodeId
    dst: NodeId
    transform: TransformType
    column_map: ColumnMap
    statement: StatementIR


@dataclass(frozen=True)
class SteppedLayout:
    columns: tuple[tuple[NodeId, ...], ...]
    version_links: tuple[tuple[NodeId, NodeId], ...]


@dataclass(frozen=True)
class FlowGraph:
    nodes: dict
    edges: tuple[FlowEdge, ...]
    version_links: tuple[tuple[NodeId, NodeId], ...] = ()

    def node(self, node_id: NodeId) -> FlowNode:
        if node_id not in self.nodes:
            raise UnknownNode(str(node_id))
        return self.nodes[node_id]

    def in_edges(self, node_id: NodeId) -> list[FlowEdge]:
        return [e for e in self.edges if e.dst == node_id]

    def out_edges(self, node_id: NodeId) -> list[FlowEdge]:
        return [e for e in self.edges if e.src == node_id]

    def with_version_links(self, links) -> "FlowGraph":
        return replace(self, version_links=tuple(links))


@dataclass(frozen=True)
class ParsedExecution:
    epoch: int
    cell_pos: int
    exec_count: int
    statements: tuple[StatementIR, ...]


def build_graph(executions: list[ParsedExecution], manifest: SnapshotManifest,
                registry: TransformRegistry) -> FlowGraph:
    """One node per table-valued statement result, one edge per input table.

    A statement result counts as table-valued when the manifest has its
    snapshot, or when the variable is known tabular from any other manifest
    entry (partial manifests keep schema-less placeholder nodes). Display
    expressions produce leaf nodes named after the chain's root variable.
    """
    tabular_vars = {NodeId.parse(nid).variable for nid in manifest.entries}
    nodes: dict[NodeId, FlowNode] = {}
    edges: list[FlowEdge] = []
    latest: dict[str, NodeId] = {}

    for execution in executions:
        for ir in execution.statements:
            if ir.parse_status != "parsed":
                continue
            inputs = [latest[v] for v in sorted(referenced_variables(ir)) if v in latest]
            seen: set[NodeId] = set()
            inputs = [i for i in inputs if not (i in seen or seen.add(i))]
            transform = registry.reduce_chain(ir.calls) if ir.calls else registry.unknown

            produced: list[tuple[str, bool]] = []
            if ir.display_expr:
                root = _root_variable(ir)
                if root is not None:
                    candidate = NodeId(root, execution.exec_count, ir.line_id)
                    if candidate in manifest:
                        produced.append((root, True))
            else:
                for var in ir.targets:
                    candidate = NodeId(var, execution.exec_count, ir.line_id)
                    if candidate in manifest or var in tabular_vars:
                        produced.append((var, False))

            for var, is_display in produced:
                node_id = NodeId(var, execution.exec_count, ir.line_id)
                if node_id in nodes:
                    continue
                has_snap = node_id in manifest
                node = FlowNode(id=node_id, epoch=execution.epoch,
                                has_snapshot=has_snap,
                                schema=manifest.schema_of(node_id),
                                is_display=is_display)
                nodes[node_id] = node
                for src in inputs:
                    if src == node_id:
                        continue
                    cmap = derive_statement_map(
                        transform, ir.calls,
                        nodes[src].schema if nodes[src].has_snapshot else None,
                        node.schema if has_snap else None)
                    edges.append(FlowEdge(src=src, dst=node_id, transform=transform,
                                          column_map=cmap, statement=ir))
                if not is_display:
                    latest[var] = node_id
    return FlowGraph(nodes=nodes, edges=tuple(edges))


def _root_variable(ir: StatementIR) -> str | None:
    for call in ir.calls:
        if call.receiver not in (RESULT, ""):
            return call.receiver
    return None


def assign_stepped_layout(graph: FlowGraph, executions: list[ParsedExecution],
                          ) -> SteppedLayout:
    """Cut executions into columns of monotone cell position.

    A re-run (cell position not past everything already laid out in the
    current column) starts a new column holding it and all later executions;
    version links join each variable's last node in column k to its first
    node in column k+1.
    """
    by_epoch: dict[int, list[NodeId]] = {}
    for node in graph.nodes.values():
        by_epoch.setdefault(node.epoch, []).append(node.id)
    for ids in by_epoch.values():
        ids.sort(key=lambda n: (n.line_id, str(n)))

    columns: list[list[NodeId]] = []
    current: list[NodeId] = []
    max_pos: int | None = None
    for execution in executions:
        if max_pos is not None and execution.cell_pos <= max_pos:
            columns.append(current)
            current = []
            max_pos = None
        current.extend(by_epoch.get(execution.epoch, ()))
        max_pos = execution.cell_pos if max_pos is None else max(max_pos, execution.cell_pos)
    if current or not columns:
        columns.append(current)

    links: list[tuple[NodeId, NodeId]] = []
    for k in range(len(columns) - 1):
        prev_by_var: dict[str, NodeId] = {}
        for nid in columns[k]:
            if not graph.nodes[nid].is_display:
                prev_by_var[nid.variable] = nid  # last variable state wins
        seen_vars: set[str] = set()
        for nid in columns[k + 1]:
            if graph.nodes[nid].is_display or nid.variable in seen_vars:
                continue
            seen_vars.add(nid.variable)
            if nid.variable in prev_by_var:
                links.append((prev_by_var[nid.variable], nid))
    return SteppedLayout(columns=tuple(tuple(c) for c in columns),
                         version_links=tuple(links))


def related_subgraph(graph: FlowGraph, node_id: NodeId) -> set[NodeId]:
    """Ancestors and descendants of a node under edge (and version-link)
    reachability; everything else renders as unrelated."""
    graph.node(node_id)
    forward: dict[NodeId, set[NodeId]] = {}
    backward: dict[NodeId, set[NodeId]] = {}
    pairs = [(e.src, e.dst) for e in graph.edges] + list(graph.version_links)
    for src, dst in pairs:
        forward.setdefault(src, set()).add(dst)
        backward.setdefault(dst, set()).add(src)

    def reach(start, adjacency):
        seen, stack = set(), [start]
        while stack:
            cur = stack.pop()
            for nxt in adjacency.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    return {node_id} | reach(node_id, forward) | reach(node_id, backward)
