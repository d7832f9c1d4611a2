import functools
import random

from conftest import executions_from_cells, fake_manifest
from noteflow.charts import (BAR, HISTOGRAM, LINE, SCATTER, ChartSpec, Encoding,
                             count_encoding, validate_spec)
from noteflow.facts import DataFact, HistogramData, mine_node_facts
from noteflow.graph import NodeId, build_graph
from noteflow.recommend import (FACT, TRANSFORMATION, Recommendation,
                                RecommendationTag, dedup_merge_tags,
                                enhance_with_color, filter_candidates,
                                generate_from_facts, generate_from_ops,
                                operated_columns, rank, recommend_for_node)
from noteflow.snapshots import ColumnProfile, profile
from test_snapshots import snap


def prof(name, dtype="float", distinct=50, categorical=None, temporal=False):
    if categorical is None:
        categorical = dtype in ("string", "bool") or distinct <= 20
    return ColumnProfile(name=name, dtype=dtype, null_count=0, distinct_count=distinct,
                         min_value=None, max_value=None, is_temporal=temporal,
                         is_categorical=categorical)


def graph_for(cells, schemas, registry):
    executions = executions_from_cells(cells)
    return build_graph(executions, fake_manifest(schemas), registry)


def test_replace_rule_emits_bar(registry):
    graph = graph_for(
        ["df = pd.read_csv('apps.csv')",
         "df['Size'] = df['Size'].replace('Varies with device', 0)"],
        {"df_C1_L1": [("Size", "string")], "df_C2_L1": [("Size", "string")]},
        registry)
    node = NodeId("df", 2, 1)
    profiles = {"Size": prof("Size", "string")}
    cands = generate_from_ops(node, graph.in_edges(node), profiles, registry)
    replace_charts = [c for c in cands
                      if any(t.transform == "replace" for t in c.tags)]
    assert replace_charts
    chart = replace_charts[0].chart
    assert chart.mark == BAR
    assert chart.x.field == "Size" and chart.x.type == "nominal"
    assert chart.y.is_count


def test_fill_rule_numeric_histogram(registry):
    graph = graph_for(
        ["df = pd.read_csv('x.csv')", "df['mpg'] = df['mpg'].fillna(0)"],
        {"df_C1_L1": [("mpg", "float")], "df_C2_L1": [("mpg", "float")]},
        registry)
    node = NodeId("df", 2, 1)
    cands = generate_from_ops(node, graph.in_edges(node), {"mpg": prof("mpg")}, registry)
    fill_charts = [c for c in cands if any(t.transform == "fill" for t in c.tags)]
    assert fill_charts
    chart = fill_charts[0].chart
    assert chart.mark == HISTOGRAM and chart.x.field == "mpg" and chart.x.bin


def test_aggregate_rule_bar_matches_grouped_means(registry):
    # oracle: brute-force grouped means over the fixture table
    table = snap([("cylinder", "int"), ("mpg", "float")],
                 [[4, 4, 6, 8, 8, 8], [30.0, 32.0, 22.0, 15.0, 17.0, 16.0]])
    expected = {}
    for cyl, mpg in zip(table.cells[0], table.cells[1]):
        expected.setdefault(cyl, []).append(mpg)
    expected = {str(k): sum(v) / len(v) for k, v in expected.items()}

    graph = graph_for(
        ["df = pd.read_csv('x.csv')",
         "df2 = df.groupby('cylinder', as_index=False).mean()"],
        {"df_C1_L1": [("cylinder", "int"), ("mpg", "float"), ("name", "string")],
         "df2_C2_L1": [("cylinder", "int"), ("mpg", "float")]},
        registry)
    node = NodeId("df2", 2, 1)
    profiles = {"cylinder": prof("cylinder", "int", distinct=3),
                "mpg": prof("mpg", "float")}
    cands = generate_from_ops(node, graph.in_edges(node), profiles, registry)
    agg = [c.chart for c in cands if c.chart.mark == BAR and c.chart.y.aggregate == "mean"]
    assert agg and agg[0].x.field == "cylinder" and agg[0].y.field == "mpg"

    from noteflow.trace import render_data
    data = render_data(agg[0], table)
    rendered = {dict(r)["x"]: dict(r)["y"] for r in data.series}
    assert rendered == expected


def test_generate_from_facts_charts(registry):
    node = NodeId("df", 1, 1)
    profiles = {"horsepower": prof("horsepower"), "weight": prof("weight"),
                "date": prof("date", "string", temporal=True),
                "recovered": prof("recovered")}
    dist = [(DataFact("distribution", ("horsepower",), 0.5, str(node)),
             HistogramData(kind="binned"))]
    corr = [DataFact("correlation", ("horsepower", "weight"), 0.86, str(node))]
    trend = [DataFact("trend", ("date", "recovered"), 0.7, str(node))]
    cands = generate_from_facts(node, dist, corr, trend, profiles)
    marks = {c.chart.mark for c in cands}
    assert {HISTOGRAM, SCATTER, LINE} <= marks
    scatter = next(c for c in cands if c.chart.mark == SCATTER)
    assert scatter.chart.x.field == "horsepower" and scatter.chart.y.field == "weight"
    assert scatter.tags[0].score == 0.86
    line = next(c for c in cands if c.chart.mark == LINE)
    assert line.chart.x.type == "temporal"


def test_color_enhancement_combinatorics():
    base = Recommendation(
        node=NodeId("df", 1, 1),
        chart=ChartSpec(mark=HISTOGRAM, x=Encoding("mpg", "quantitative", bin=True),
                        y=count_encoding()),
        tags=(RecommendationTag(reason=FACT, fact_kind="distribution", score=0.5),))
    profiles = {"mpg": prof("mpg"), "origin": prof("origin", "string", distinct=3),
                "type": prof("type", "string", distinct=2)}
    variants = enhance_with_color([base], profiles)
    assert len(variants) == 2
    assert {v.chart.color.field for v in variants} == {"origin", "type"}
    assert all(v.tags == base.tags for v in variants)
    assert enhance_with_color([base], {"mpg": prof("mpg")}) == []


def test_dedup_merges_tags():
    node = NodeId("df", 1, 1)
    chart = ChartSpec(mark=HISTOGRAM, x=Encoding("mpg", "quantitative", bin=True),
                      y=count_encoding())
    t1 = RecommendationTag(reason=TRANSFORMATION, transform="fill", edge_epoch=2, line=1)
    t2 = RecommendationTag(reason=FACT, fact_kind="distribution", score=0.5)
    t3 = RecommendationTag(reason=TRANSFORMATION, transform="mutate", edge_epoch=1, line=1)
    merged = dedup_merge_tags([
        Recommendation(node, chart, (t1,)),
        Recommendation(node, chart, (t2,)),
        Recommendation(node, chart, (t3,)),
    ])
    assert len(merged) == 1
    assert set(merged[0].tags) == {t1, t2, t3}
    assert dedup_merge_tags(merged) == merged


def test_dedup_keeps_distinct_charts():
    node = NodeId("df", 1, 1)
    c1 = ChartSpec(mark=BAR, x=Encoding("a", "nominal"), y=count_encoding())
    c2 = ChartSpec(mark=BAR, x=Encoding("b", "nominal"), y=count_encoding())
    tag = RecommendationTag(reason=FACT, fact_kind="distribution", score=0.5)
    merged = dedup_merge_tags([Recommendation(node, c1, (tag,)),
                               Recommendation(node, c2, (tag,))])
    assert len(merged) == 2


# --- ranking oracle -------------------------------------------------------

def brute_force_order(cands, operated):
    """Independent pairwise comparator implementing the six criteria."""

    def crit(c):
        t_tags = [t for t in c.tags if t.reason == TRANSFORMATION]
        recency = max(((t.edge_epoch, t.line) for t in t_tags), default=(-1, -1))
        corr = max((t.score for t in c.tags if t.fact_kind == "correlation"),
                   default=0.0) if c.chart.mark == SCATTER else 0.0
        return {
            "transform": bool(t_tags),
            "recency": recency,
            "distribution": any(t.fact_kind == "distribution" for t in c.tags),
            "operated": any(f in operated for f in c.chart.fields()),
            "ntags": len(c.tags),
            "corr": corr,
            "tie": (c.node.variable, c.chart.x.field or "", c.chart.y.field or "",
                    c.chart.mark, c.chart.color.field if c.chart.color else ""),
        }

    def compare(a, b):
        ka, kb = crit(a), crit(b)
        for name in ("transform", "recency", "distribution", "operated", "ntags", "corr"):
            if ka[name] != kb[name]:
                return -1 if ka[name] > kb[name] else 1
        if ka["tie"] != kb["tie"]:
            return -1 if ka["tie"] < kb["tie"] else 1
        return 0

    return sorted(cands, key=functools.cmp_to_key(compare))


def random_candidates(rng, n):
    cols = ["a", "b", "c", "d"]
    out = []
    for _ in range(n):
        mark = rng.choice([HISTOGRAM, BAR, SCATTER, LINE])
        x = rng.choice(cols)
        y = rng.choice(cols)
        if mark == HISTOGRAM:
            chart = ChartSpec(mark=mark, x=Encoding(x, "quantitative", bin=True),
                              y=count_encoding())
        elif mark == BAR:
            chart = ChartSpec(mark=mark, x=Encoding(x, "nominal"), y=count_encoding())
        elif mark == SCATTER:
            chart = ChartSpec(mark=mark, x=Encoding(x, "quantitative"),
                              y=Encoding(y, "quantitative"))
        else:
            chart = ChartSpec(mark=mark, x=Encoding(x, "temporal"),
                              y=Encoding(y, "quantitative"))
        tags = []
        for _ in range(rng.randint(1, 3)):
            if rng.random() < 0.5:
                tags.append(RecommendationTag(
                    reason=TRANSFORMATION,
                    transform=rng.choice(["fill", "replace", "aggregate"]),
                    edge_epoch=rng.randint(1, 5), line=rng.randint(1, 3)))
            else:
                tags.append(RecommendationTag(
                    reason=FACT,
                    fact_kind=rng.choice(["distribution", "correlation", "trend"]),
                    score=round(rng.random(), 3)))
        node = NodeId(rng.choice(["df", "df2"]), rng.randint(1, 3), 1)
        out.append(Recommendation(node=node, chart=chart, tags=tuple(sorted(set(tags)))))
    return out


def test_rank_matches_brute_force_oracle():
    rng = random.Random(2024)
    operated = {"a", "c"}
    for _ in range(30):
        cands = random_candidates(rng, rng.randint(1, 20))
        expected = [(c.node, c.chart, c.tags) for c in brute_force_order(cands, operated)]
        got = [(c.node, c.chart, c.tags) for c in rank(cands, operated)]
        assert got == expected


def test_rank_permutation_invariant():
    rng = random.Random(7)
    cands = random_candidates(rng, 15)
    operated = {"b"}
    baseline = [(c.node, c.chart) for c in rank(cands, operated)]
    for _ in range(5):
        shuffled = list(cands)
        rng.shuffle(shuffled)
        assert [(c.node, c.chart) for c in rank(shuffled, operated)] == baseline


def test_rank_prioritizes_transformations_and_recency():
    node = NodeId("df", 1, 1)
    chart = ChartSpec(mark=BAR, x=Encoding("a", "nominal"), y=count_encoding())
    fact_only = Recommendation(node, chart,
                               (RecommendationTag(reason=FACT, fact_kind="distribution",
                                                  score=0.5),))
    chart2 = ChartSpec(mark=BAR, x=Encoding("b", "nominal"), y=count_encoding())
    epoch5 = Recommendation(node, chart2, (RecommendationTag(
        reason=TRANSFORMATION, transform="fill", edge_epoch=5, line=1),))
    chart3 = ChartSpec(mark=BAR, x=Encoding("c", "nominal"), y=count_encoding())
    epoch3 = Recommendation(node, chart3, (RecommendationTag(
        reason=TRANSFORMATION, transform="fill", edge_epoch=3, line=1),))
    ordered = rank([fact_only, epoch3, epoch5])
    assert [r.chart for r in ordered] == [chart2, chart3, chart]


def test_filter_candidates():
    node1 = NodeId("df", 1, 1)
    node2 = NodeId("df2", 1, 2)
    mk = lambda node, field, tag: Recommendation(
        node, ChartSpec(mark=BAR, x=Encoding(field, "nominal"), y=count_encoding()),
        (tag,))
    fill_tag = RecommendationTag(reason=TRANSFORMATION, transform="fill",
                                 edge_epoch=1, line=1)
    dist_tag = RecommendationTag(reason=FACT, fact_kind="distribution", score=0.5)
    cands = rank([mk(node1, "Type", fill_tag), mk(node1, "Size", dist_tag),
                  mk(node2, "Type", dist_tag)])

    by_column = filter_candidates(cands, columns={"Type"})
    assert all("Type" in c.chart.fields() for c in by_column)
    assert len(by_column) == 2

    latest = filter_candidates(cands, default_table="df2")
    assert {c.node.variable for c in latest} == {"df2"}

    fill_only = filter_candidates(cands, reasons={"transformation/fill"})
    assert len(fill_only) == 1 and fill_only[0].tags[0].transform == "fill"

    explicit = filter_candidates(cands, table="df", default_table="df2")
    assert {c.node.variable for c in explicit} == {"df"}

    # order preserved: filtered output is a subsequence
    charts = [c.chart for c in cands]
    assert [charts.index(c.chart) for c in by_column] == \
        sorted(charts.index(c.chart) for c in by_column)


def test_recommend_for_node_specs_valid_and_capped(registry):
    table = snap([("cylinder", "int"), ("mpg", "float"), ("name", "string")],
                 [[4, 6, 8, 4], [30.0, 22.0, 15.0, 29.0],
                  ["a", "b", "c", "d"]])
    profiles = profile(table)
    dist, corr, trend = mine_node_facts(table, profiles, threshold=0.0)
    graph = graph_for(
        ["df = pd.read_csv('x.csv')", "df2 = df.fillna(0)"],
        {"df_C1_L1": [("cylinder", "int"), ("mpg", "float"), ("name", "string")],
         "df2_C2_L1": [("cylinder", "int"), ("mpg", "float"), ("name", "string")]},
        registry)
    node = NodeId("df2", 2, 1)
    recs = recommend_for_node(node, graph.in_edges(node), dist, corr, trend,
                              profiles, registry, cap=10)
    assert 0 < len(recs) <= 10
    for rec in recs:
        assert validate_spec(rec.chart) == [], rec.chart
        assert rec.rank_key is not None
        assert rec.tags
