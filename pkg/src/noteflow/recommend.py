"""Chart candidate generation (querying phase) and ranking.

Candidates come from two factors: distribution-altering transformation
operations on incoming edges, and mined data facts. Identical charts found
through several routes merge into one candidate carrying every tag.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .charts import (BAR, HEATMAP, HISTOGRAM, LINE, NOMINAL, QUANTITATIVE, SCATTER,
                     TEMPORAL, ChartSpec, Encoding, count_encoding)
from .facts import CATEGORY_CAP, CORRELATION, DISTRIBUTION, TREND
from .graph import FlowEdge, NodeId
from .snapshots import ColumnProfile
from .transforms import TransformRegistry

TRANSFORMATION = "transformation"
FACT = "fact"

_AGG_FUNCS = {"mean": "mean", "sum": "sum", "count": "count", "size": "count",
              "nunique": "count"}


@dataclass(frozen=True, order=True)
class RecommendationTag:
    reason: str                         # transformation | fact
    transform: str | None = None
    fact_kind: str | None = None
    edge_epoch: int = -1                # transformation tags: tagging edge's epoch
    line: int = -1
    score: float = 0.0                  # fact tags: fact strength

    @property
    def detail(self) -> str:
        return self.transform if self.reason == TRANSFORMATION else (self.fact_kind or "")


@dataclass(frozen=True)
class Recommendation:
    node: NodeId
    chart: ChartSpec
    tags: tuple[RecommendationTag, ...]
    rank_key: tuple | None = None


def _dist_chart(column: str, profiles: dict) -> ChartSpec | None:
    prof = profiles.get(column)
    if prof is None:
        return None
    if prof.dtype in ("int", "float"):
        return ChartSpec(mark=HISTOGRAM,
                         x=Encoding(field=column, type=QUANTITATIVE, bin=True),
                         y=count_encoding())
    return ChartSpec(mark=BAR, x=Encoding(field=column, type=NOMINAL), y=count_encoding())


def generate_from_ops(node: NodeId, in_edges: list[FlowEdge], profiles: dict,
                      registry: TransformRegistry) -> list[Recommendation]:
    """Rule charts per incoming edge whose chain touches a target operation.

    Rules reference the operated columns; rules whose columns are absent from
    the node's schema emit nothing.
    """
    out: list[Recommendation] = []
    for edge in in_edges:
        stmt = edge.statement
        stmt_refs = [r for c in stmt.calls for r in c.column_refs]
        tag_base = dict(reason=TRANSFORMATION, edge_epoch=stmt.cell_epoch, line=stmt.line_id)
        for call in stmt.calls:
            ttype = registry.classify(call)
            if not ttype.is_target:
                continue
            tag = RecommendationTag(transform=ttype.name, **tag_base)
            specs: list[ChartSpec] = []
            refs = [r for r in (call.column_refs or stmt_refs) if r in profiles]
            if ttype.name in ("replace", "fill"):
                specs = [_dist_chart(r, profiles) for r in refs]
            elif ttype.name in ("mutate", "extract", "separate", "merge"):
                produced = [dst for src, dst in edge.column_map.pairs if src != dst]
                produced += [c for c in edge.column_map.added]
                cols = [c for c in produced if c in profiles] or refs
                specs = [_dist_chart(c, profiles) for c in cols]
            elif ttype.name in ("filter", "deduplicate", "sort"):
                cols = refs or sorted(profiles)
                specs = [_dist_chart(c, profiles) for c in cols]
            elif ttype.name == "aggregate":
                keys = [r for c in stmt.calls if c.func_name == "groupby"
                        for r in c.column_refs if r in profiles]
                values = [p.name for p in profiles.values()
                          if p.dtype in ("int", "float") and p.name not in keys]
                agg = _AGG_FUNCS.get(call.func_name, "mean")
                for key in keys:
                    for val in values:
                        specs.append(ChartSpec(
                            mark=BAR, x=Encoding(field=key, type=NOMINAL),
                            y=Encoding(field=val, type=QUANTITATIVE, aggregate=agg)))
            elif ttype.name in ("fold", "unfold"):
                axes = [r for r in refs
                        if profiles[r].is_categorical
                        and profiles[r].distinct_count <= CATEGORY_CAP]
                if len(axes) >= 2:
                    specs.append(ChartSpec(mark=HEATMAP,
                                           x=Encoding(field=axes[0], type=NOMINAL),
                                           y=Encoding(field=axes[1], type=NOMINAL)))
            for spec in specs:
                if spec is not None:
                    out.append(Recommendation(node=node, chart=spec, tags=(tag,)))
    return out


def generate_from_facts(node: NodeId, dist_facts, corr_facts, trend_facts,
                        profiles: dict) -> list[Recommendation]:
    out: list[Recommendation] = []
    for fact, _hist in dist_facts:
        tag = RecommendationTag(reason=FACT, fact_kind=DISTRIBUTION, score=fact.score)
        if len(fact.columns) == 1:
            spec = _dist_chart(fact.columns[0], profiles)
        else:
            value, by = fact.columns
            spec = ChartSpec(mark=BAR, x=Encoding(field=by, type=NOMINAL),
                             y=Encoding(field=value, type=QUANTITATIVE, aggregate="mean"))
        if spec is not None:
            out.append(Recommendation(node=node, chart=spec, tags=(tag,)))
    for fact in corr_facts:
        a, b = fact.columns
        spec = ChartSpec(mark=SCATTER, x=Encoding(field=a, type=QUANTITATIVE),
                         y=Encoding(field=b, type=QUANTITATIVE))
        tag = RecommendationTag(reason=FACT, fact_kind=CORRELATION, score=fact.score)
        out.append(Recommendation(node=node, chart=spec, tags=(tag,)))
    for fact in trend_facts:
        t, v = fact.columns
        spec = ChartSpec(mark=LINE, x=Encoding(field=t, type=TEMPORAL),
                         y=Encoding(field=v, type=QUANTITATIVE))
        tag = RecommendationTag(reason=FACT, fact_kind=TREND, score=fact.score)
        out.append(Recommendation(node=node, chart=spec, tags=(tag,)))
    return out


def enhance_with_color(candidates: list[Recommendation], profiles: dict,
                       ) -> list[Recommendation]:
    """Color-enhanced variants per categorical column; tags are inherited."""
    extra: list[Recommendation] = []
    categorical = [p.name for p in profiles.values()
                   if p.is_categorical and 0 < p.distinct_count <= CATEGORY_CAP]
    for cand in candidates:
        if cand.chart.color is not None or cand.chart.mark == HEATMAP:
            continue
        for col in categorical:
            if col in cand.chart.fields():
                continue
            spec = replace(cand.chart, color=Encoding(field=col, type=NOMINAL))
            extra.append(Recommendation(node=cand.node, chart=spec, tags=cand.tags))
    return extra


def dedup_merge_tags(candidates: list[Recommendation]) -> list[Recommendation]:
    """Merge candidates with identical (node, chart) into one, uniting tags."""
    merged: dict = {}
    order: list = []
    for cand in candidates:
        key = (cand.node, cand.chart)
        if key not in merged:
            merged[key] = list(cand.tags)
            order.append(key)
        else:
            for tag in cand.tags:
                if tag not in merged[key]:
                    merged[key].append(tag)
    return [Recommendation(node=node, chart=chart, tags=tuple(sorted(merged[(node, chart)])))
            for node, chart in order]


def rank_key(cand: Recommendation, operated: set) -> tuple:
    """Lexicographic ranking key, highest priority first (descending parts
    encoded so that plain ascending sort of keys is impossible to misuse:
    rank() negates them explicitly)."""
    t_tags = [t for t in cand.tags if t.reason == TRANSFORMATION]
    has_transform = 1 if t_tags else 0
    recency = max(((t.edge_epoch, t.line) for t in t_tags), default=(-1, -1))
    has_distribution = 1 if any(t.fact_kind == DISTRIBUTION for t in cand.tags) else 0
    operated_hit = 1 if any(f in operated for f in cand.chart.fields()) else 0
    tag_count = len(cand.tags)
    corr = 0.0
    if cand.chart.mark == SCATTER:
        corr = max((t.score for t in cand.tags if t.fact_kind == CORRELATION), default=0.0)
    tie = (cand.node.variable, cand.chart.x.field or "", cand.chart.y.field or "",
           cand.chart.mark, cand.chart.color.field if cand.chart.color else "")
    return (has_transform, recency[0], recency[1], has_distribution, operated_hit,
            tag_count, corr, tie)


def operated_columns(in_edges: list[FlowEdge], registry: TransformRegistry) -> set:
    """Columns touched by incoming transformations: chain refs, added columns
    and pair fields of schema-changing edges (identity maps of
    non-schema-changing edges would mark everything operated)."""
    out: set = set()
    for edge in in_edges:
        for call in edge.statement.calls:
            out.update(call.column_refs)
        out.update(edge.column_map.added)
        if edge.transform.is_schema_changing:
            for src, dst in edge.column_map.pairs:
                out.add(src)
                out.add(dst)
    return out


def rank(candidates: list[Recommendation], operated: set | None = None,
         ) -> list[Recommendation]:
    """Order candidates by the six ranking criteria; ties break ascending on
    (variable, x, y, mark, color) so the order is total and deterministic."""
    operated = operated or set()
    def sort_key(cand: Recommendation):
        k = rank_key(cand, operated)
        return (-k[0], -k[1], -k[2], -k[3], -k[4], -k[5], -k[6], k[7])
    ordered = sorted(candidates, key=sort_key)
    return [replace(c, rank_key=rank_key(c, operated)) for c in ordered]


def filter_candidates(candidates: list[Recommendation], table: str | None = None,
                      columns=None, reasons=None, default_table: str | None = None,
                      ) -> list[Recommendation]:
    """Order-preserving filter over a ranked list.

    With no table filter the latest data variable of the queried cell applies
    (callers pass it via default_table).
    """
    if table is None:
        table = default_table
    columns = set(columns) if columns else None
    reasons = set(reasons) if reasons else None
    out = []
    for cand in candidates:
        if table is not None and cand.node.variable != table:
            continue
        if columns is not None and not (columns & set(cand.chart.fields())):
            continue
        if reasons is not None and not any(_tag_matches(t, reasons) for t in cand.tags):
            continue
        out.append(cand)
    return out


def _tag_matches(tag: RecommendationTag, reasons: set) -> bool:
    names = {tag.reason, tag.detail, f"{tag.reason}/{tag.detail}"}
    return bool(names & reasons)


def recommend_for_node(node: NodeId, in_edges, dist_facts, corr_facts, trend_facts,
                       profiles: list[ColumnProfile], registry: TransformRegistry,
                       cap: int = 30) -> list[Recommendation]:
    """Full querying + ranking pipeline for one node, capped after ranking."""
    prof_map = {p.name: p for p in profiles}
    base = generate_from_ops(node, in_edges, prof_map, registry)
    base += generate_from_facts(node, dist_facts, corr_facts, trend_facts, prof_map)
    base += enhance_with_color(base, prof_map)
    merged = dedup_merge_tags(base)
    ordered = rank(merged, operated_columns(in_edges, registry))
    return ordered[:cap] if cap else ordered
