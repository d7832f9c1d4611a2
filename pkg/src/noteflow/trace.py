"""Consistent chart tracing across the flow graph.

A pinned chart's encodings propagate to every related node; where a
schema-changing edge renamed, created or deleted a traced column, the
encoding is substituted through the edge's column map. Nodes where no
substitution exists (or no snapshot exists) become untraceable; rendered
nodes are flagged changed or similar against their flow predecessor.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .charts import BAR, HEATMAP, HISTOGRAM, LINE, SCATTER, ChartSpec
from .errors import SpecSchemaMismatch
from .facts import (aggregate_by_category, bin_numeric, count_categories,
                    _category_key, _time_sort_key)
from .graph import FlowEdge, FlowGraph, NodeId
from .snapshots import TableSnapshot

RENDERABLE = "renderable"
SUBSTITUTED = "substituted"
UNTRACEABLE = "untraceable"

CHANGED = "changed"
SIMILAR = "similar"
NOT_APPLICABLE = "not_applicable"

REL_TOL = 1e-6
ABS_TOL = 1e-9
SCATTER_CAP = 2000
SCATTER_SEED = 42

NODE_COLORS = {CHANGED: "blue", SIMILAR: "lightblue", NOT_APPLICABLE: "blue"}
UNTRACEABLE_COLOR = "red"


@dataclass(frozen=True)
class ChartData:
    series: tuple[tuple, ...]       # (key, value) pairs per record, canonical order

    def records(self) -> list[dict]:
        return [dict(row) for row in self.series]


@dataclass(frozen=True)
class TraceEntry:
    status: str
    change: str = NOT_APPLICABLE
    spec: ChartSpec | None = None
    data: ChartData | None = None
    substitutions: tuple = ()       # (from_column, to_column or None, edge key)
    reason: str | None = None       # untraceable detail

    @property
    def color(self) -> str:
        if self.status == UNTRACEABLE:
            return UNTRACEABLE_COLOR
        return NODE_COLORS[self.change]


@dataclass(frozen=True)
class TraceResult:
    pinned_node: NodeId
    pinned_spec: ChartSpec
    per_node: dict


def substitute_encoding(spec: ChartSpec, edge: FlowEdge, direction: str):
    """Map a spec's encoded fields across one edge.

    Returns (new spec or None, substitutions, failed fields). Identity for
    non-schema-changing transforms; otherwise each field maps through the
    edge's column pairs, a failing color channel is dropped, and a failing
    axis field fails the spec.
    """
    if not edge.transform.is_schema_changing:
        return spec, (), ()
    cmap = edge.column_map
    lookup = cmap.backward if direction == "backward" else cmap.forward
    edge_key = f"{edge.src}->{edge.dst}"
    subs: list = []
    failed: list = []
    out = spec
    for channel in ("x", "y", "color"):
        enc = getattr(spec, channel)
        if enc is None or enc.field is None:
            continue
        mapped = lookup(enc.field)
        if mapped is None:
            if channel == "color":
                subs.append((enc.field, None, edge_key))
                out = replace(out, color=None)
            else:
                failed.append(enc.field)
        elif mapped != enc.field:
            subs.append((enc.field, mapped, edge_key))
            out = replace(out, **{channel: replace(enc, field=mapped)})
    if failed:
        return None, tuple(subs), tuple(failed)
    return out, tuple(subs), ()


def trace(graph: FlowGraph, pinned_node: NodeId, spec: ChartSpec, snapshots,
          rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL,
          scatter_cap: int = SCATTER_CAP, seed: int = SCATTER_SEED) -> TraceResult:
    """Propagate a pinned chart across all related nodes.

    ``snapshots`` maps node-id strings to TableSnapshot (absent entries are
    untraceable with reason no-snapshot). Version links count as identity
    edges. Paths are shortest-first with smallest-epoch tie-breaks; among
    equal-length paths one with a surviving spec wins.
    """
    pinned = graph.node(pinned_node)
    pinned_snapshot = snapshots.get(str(pinned_node))
    if pinned_snapshot is None:
        raise SpecSchemaMismatch(f"pinned node {pinned_node} has no snapshot")
    missing = [f for f in spec.fields() if f not in pinned_snapshot.schema]
    if missing:
        raise SpecSchemaMismatch(f"fields {missing} absent from {pinned_node}")

    out_adj, in_adj = _adjacency(graph)
    spec_state: dict[NodeId, ChartSpec | None] = {pinned_node: spec}
    subs_state: dict[NodeId, tuple] = {pinned_node: ()}
    conn_subbed: dict[tuple, bool] = {}   # (upstream, downstream) -> edge substituted
    preds: dict[NodeId, list] = {}

    def epoch_key(nid: NodeId):
        return (graph.nodes[nid].epoch, str(nid))

    for direction, adj in (("backward", in_adj), ("forward", out_adj)):
        layer = [pinned_node]
        while layer:
            candidates: dict[NodeId, list] = {}
            for u in sorted(layer, key=epoch_key):
                for v, edge in adj.get(u, ()):
                    if v in spec_state:
                        continue
                    candidates.setdefault(v, []).append((u, edge))
            for v in sorted(candidates, key=epoch_key):
                best = None
                for u, edge in candidates[v]:
                    nxt = _step(spec_state.get(u), edge, direction)
                    rank = (0 if nxt[0] is not None else 1,) + epoch_key(u)
                    if best is None or rank < best[0]:
                        best = (rank, u, edge, nxt)
                _, u, edge, (new_spec, subs) = best
                spec_state[v] = new_spec
                subs_state[v] = subs_state.get(u, ()) + subs
                upstream, downstream = (v, u) if direction == "backward" else (u, v)
                conn_subbed[(upstream, downstream)] = bool(subs)
                preds.setdefault(downstream, []).append(upstream)
            layer = sorted(candidates, key=epoch_key)

    per_node: dict[NodeId, TraceEntry] = {}
    for nid in spec_state:
        node = graph.nodes[nid]
        walked = spec_state[nid]
        if walked is None:
            per_node[nid] = TraceEntry(status=UNTRACEABLE, reason="unmapped-column")
            continue
        snapshot = snapshots.get(str(nid))
        if snapshot is None:
            per_node[nid] = TraceEntry(status=UNTRACEABLE, reason="no-snapshot")
            continue
        if any(f not in snapshot.schema for f in walked.fields()):
            per_node[nid] = TraceEntry(status=UNTRACEABLE, reason="missing-column")
            continue
        data = render_data(walked, snapshot, scatter_cap=scatter_cap, seed=seed)
        subs = subs_state.get(nid, ())
        status = SUBSTITUTED if subs else RENDERABLE
        per_node[nid] = TraceEntry(status=status, spec=walked, data=data,
                                   substitutions=subs)

    for nid, entry in per_node.items():
        if entry.data is None:
            continue
        upstreams = [p for p in preds.get(nid, ()) if p in per_node]
        upstreams.sort(key=epoch_key)
        flag = NOT_APPLICABLE
        for up in upstreams:
            pred_entry = per_node[up]
            if pred_entry.data is None:
                continue
            edge_subbed = conn_subbed.get((up, nid), False)
            flag = chart_change(entry, pred_entry, edge_substituted=edge_subbed,
                                rel_tol=rel_tol, abs_tol=abs_tol)
            break
        per_node[nid] = replace(entry, change=flag)

    return TraceResult(pinned_node=pinned_node, pinned_spec=spec, per_node=per_node)


def _step(current: ChartSpec | None, edge, direction: str):
    if current is None:
        return None, ()
    if edge is None:  # version link: identity
        return current, ()
    new_spec, subs, _failed = substitute_encoding(current, edge, direction)
    return new_spec, subs


def _adjacency(graph: FlowGraph):
    out_adj: dict[NodeId, list] = {}
    in_adj: dict[NodeId, list] = {}
    seen_pairs = set()
    for edge in graph.edges:
        out_adj.setdefault(edge.src, []).append((edge.dst, edge))
        in_adj.setdefault(edge.dst, []).append((edge.src, edge))
        seen_pairs.add((edge.src, edge.dst))
    for src, dst in graph.version_links:
        if (src, dst) in seen_pairs:
            continue
        out_adj.setdefault(src, []).append((dst, None))
        in_adj.setdefault(dst, []).append((src, None))
    return out_adj, in_adj


def chart_change(entry: TraceEntry, predecessor: TraceEntry,
                 edge_substituted: bool = False,
                 rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL) -> str:
    """Changed when a substitution crossed the connecting edge or the chart
    data moved beyond tolerance; otherwise similar."""
    if edge_substituted:
        return CHANGED
    if _data_differs(entry.data, predecessor.data, rel_tol, abs_tol):
        return CHANGED
    return SIMILAR


def _data_differs(a: ChartData, b: ChartData, rel_tol: float, abs_tol: float) -> bool:
    rows_a, rows_b = a.records(), b.records()
    if len(rows_a) != len(rows_b):
        return True
    def split(row):
        key = tuple((k, v) for k, v in sorted(row.items()) if not isinstance(v, float))
        nums = tuple((k, v) for k, v in sorted(row.items()) if isinstance(v, float))
        return key, nums
    for ra, rb in zip(rows_a, rows_b):
        key_a, nums_a = split(ra)
        key_b, nums_b = split(rb)
        if key_a != key_b:
            return True
        if len(nums_a) != len(nums_b):
            return True
        for (ka, va), (kb, vb) in zip(nums_a, nums_b):
            if ka != kb:
                return True
            if abs(va - vb) > max(abs_tol, rel_tol * max(abs(va), abs(vb))):
                return True
    return False


def render_data(spec: ChartSpec, snapshot: TableSnapshot,
                scatter_cap: int = SCATTER_CAP, seed: int = SCATTER_SEED) -> ChartData:
    """Deterministic chart data; histogram/bar aggregation shares the fact
    miner's binning helpers bit-for-bit."""
    for f in spec.fields():
        if f not in snapshot.schema:
            raise SpecSchemaMismatch(f"field {f} not in snapshot")
    if spec.mark == HISTOGRAM:
        return _render_histogram(spec, snapshot)
    if spec.mark == BAR:
        return _render_bar(spec, snapshot)
    if spec.mark == LINE:
        return _render_line(spec, snapshot)
    if spec.mark == SCATTER:
        return _render_scatter(spec, snapshot, scatter_cap, seed)
    if spec.mark == HEATMAP:
        return _render_heatmap(spec, snapshot)
    raise SpecSchemaMismatch(f"unknown mark {spec.mark}")


def _color_values(spec, snapshot):
    if spec.color is None or spec.color.field is None:
        return None
    _, values = snapshot.column(spec.color.field)
    return [("null" if v is None else _category_key(v)) for v in values]


def _render_histogram(spec, snapshot) -> ChartData:
    _, values = snapshot.column(spec.x.field)
    colors = _color_values(spec, snapshot)
    if colors is None:
        bins = bin_numeric(values)
        rows = [(("bin0", lo), ("bin1", hi), ("y", float(n))) for lo, hi, n in bins]
        return ChartData(series=tuple(rows))
    # shared bin edges across color groups
    bins = bin_numeric(values)
    rows = []
    for i, (lo, hi, _n) in enumerate(bins):
        last = i == len(bins) - 1
        groups: dict[str, int] = {}
        for v, c in zip(values, colors):
            if v is None:
                continue
            v = float(v)
            if (lo <= v < hi) or (last and lo <= v <= hi) or (lo == hi and v == lo):
                groups[c] = groups.get(c, 0) + 1
        for key in sorted(groups):
            rows.append((("bin0", lo), ("bin1", hi), ("color", key), ("y", float(groups[key]))))
    return ChartData(series=tuple(rows))


def _render_bar(spec, snapshot) -> ChartData:
    _, xs = snapshot.column(spec.x.field)
    if spec.y.is_count:
        colors = _color_values(spec, snapshot)
        if colors is None:
            cats = count_categories(xs)
            rows = [(("x", k), ("y", float(n))) for k, n in cats]
            return ChartData(series=tuple(rows))
        kept = {k for k, _ in count_categories(xs)}
        groups: dict[tuple, int] = {}
        for x, c in zip(xs, colors):
            if x is None:
                continue
            key = _category_key(x)
            if key not in kept:
                continue
            groups[(key, c)] = groups.get((key, c), 0) + 1
        order = [k for k, _ in count_categories(xs)]
        rows = [(("x", k), ("color", c), ("y", float(n)))
                for (k, c), n in sorted(groups.items(),
                                        key=lambda kv: (order.index(kv[0][0]), kv[0][1]))]
        return ChartData(series=tuple(rows))
    pairs = aggregate_by_category(snapshot, spec.y.field, spec.x.field,
                                  how=spec.y.aggregate or "mean")
    rows = [(("x", k), ("y", float(v))) for k, v in pairs]
    return ChartData(series=tuple(rows))


def _render_line(spec, snapshot) -> ChartData:
    _, xs = snapshot.column(spec.x.field)
    _, ys = snapshot.column(spec.y.field)
    colors = _color_values(spec, snapshot)
    rows = []
    for i, (x, y) in enumerate(zip(xs, ys)):
        if x is None or y is None:
            continue
        c = colors[i] if colors is not None else None
        rows.append((_time_sort_key(x), i, str(x), float(y), c))
    rows.sort(key=lambda r: ((r[4] or "", r[0], r[1])))
    if colors is None:
        series = tuple((("x", r[2]), ("y", r[3])) for r in rows)
    else:
        series = tuple((("color", r[4]), ("x", r[2]), ("y", r[3])) for r in rows)
    return ChartData(series=series)


def _render_scatter(spec, snapshot, cap: int, seed: int) -> ChartData:
    _, xs = snapshot.column(spec.x.field)
    _, ys = snapshot.column(spec.y.field)
    colors = _color_values(spec, snapshot)
    points = []
    for i, (x, y) in enumerate(zip(xs, ys)):
        if x is None or y is None:
            continue
        c = colors[i] if colors is not None else None
        points.append((float(x), float(y), c))
    if cap and len(points) > cap:
        rng = random.Random(seed)
        idx = sorted(rng.sample(range(len(points)), cap))
        points = [points[i] for i in idx]
    if colors is None:
        series = tuple((("x", x), ("y", y)) for x, y, _ in points)
    else:
        series = tuple((("color", c), ("x", x), ("y", y)) for x, y, c in points)
    return ChartData(series=series)


def _render_heatmap(spec, snapshot) -> ChartData:
    _, xs = snapshot.column(spec.x.field)
    _, ys = snapshot.column(spec.y.field)
    keep_x = {k for k, _ in count_categories(xs)}
    keep_y = {k for k, _ in count_categories(ys)}
    cells: dict[tuple, int] = {}
    for x, y in zip(xs, ys):
        if x is None or y is None:
            continue
        kx, ky = _category_key(x), _category_key(y)
        if kx not in keep_x or ky not in keep_y:
            continue
        cells[(kx, ky)] = cells.get((kx, ky), 0) + 1
    rows = [(("x", kx), ("y", ky), ("count", float(n)))
            for (kx, ky), n in sorted(cells.items())]
    return ChartData(series=tuple(rows))
