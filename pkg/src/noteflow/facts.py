"""Data-fact mining: distributions, correlations and trends per snapshot.

The binning helpers here are also the single source of truth for chart-data
rendering, so traced histograms and recommendation histograms agree
bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime

import numpy as np

from .errors import AllNullColumn, DegenerateColumn
from .snapshots import ColumnProfile, TableSnapshot

DEFAULT_BINS = 10
DEFAULT_THRESHOLD = 0.3
CATEGORY_CAP = 20
NUMERIC_PAIR_CAP = 15

DISTRIBUTION = "distribution"
CORRELATION = "correlation"
TREND = "trend"


@dataclass(frozen=True)
class DataFact:
    kind: str
    columns: tuple[str, ...]
    score: float
    node: str


@dataclass(frozen=True)
class HistogramData:
    kind: str                     # "binned" | "categorical"
    bins: tuple = ()              # (lo, hi, count) triples
    categories: tuple = ()        # (key, count) pairs, count-desc then key-asc


def bin_numeric(values, n_bins: int = DEFAULT_BINS) -> tuple:
    """Equal-width bins over [min, max]; right-open except the last bin.

    A constant column collapses to a single bin. Bin counts always sum to the
    number of (non-null) input values.
    """
    vals = [float(v) for v in values if v is not None]
    if not vals:
        return ()
    lo, hi = min(vals), max(vals)
    if lo == hi:
        return ((lo, hi, len(vals)),)
    width = (hi - lo) / n_bins
    counts = [0] * n_bins
    for v in vals:
        idx = int((v - lo) / width)
        if idx >= n_bins:
            idx = n_bins - 1
        counts[idx] += 1
    edges = [lo + i * width for i in range(n_bins)] + [hi]
    return tuple((edges[i], edges[i + 1], counts[i]) for i in range(n_bins))


def count_categories(values, cap: int = CATEGORY_CAP) -> tuple:
    """Per-category counts, largest first (key ascending on ties), top ``cap``."""
    counts: dict = {}
    for v in values:
        if v is None:
            continue
        key = _category_key(v)
        counts[key] = counts.get(key, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(ordered[:cap])


def _category_key(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def mine_distribution(snapshot: TableSnapshot, column: str, node: str = "",
                      profiles: list[ColumnProfile] | None = None,
                      ) -> list[tuple[DataFact, HistogramData]]:
    """Distribution facts for one column, plus category-aggregated variants.

    Numeric columns bin into equal-width histograms; categorical columns
    count per category. For each categorical partner column a two-column
    variant is emitted (the column's values aggregated by the partner).
    """
    decl, values = snapshot.column(column)
    present = [v for v in values if v is not None]
    if not present:
        raise AllNullColumn(column)
    numeric = decl.dtype in ("int", "float")
    if numeric:
        hist = HistogramData(kind="binned", bins=bin_numeric(values))
    else:
        hist = HistogramData(kind="categorical", categories=count_categories(values))
    facts = [(DataFact(kind=DISTRIBUTION, columns=(column,), score=0.5, node=node), hist)]
    if numeric and profiles:
        for prof in profiles:
            if prof.name == column or not prof.is_categorical:
                continue
            if prof.distinct_count > CATEGORY_CAP or prof.distinct_count == 0:
                continue
            facts.append((
                DataFact(kind=DISTRIBUTION, columns=(column, prof.name), score=0.5, node=node),
                HistogramData(kind="categorical",
                              categories=aggregate_by_category(snapshot, column, prof.name)),
            ))
    return facts


def aggregate_by_category(snapshot: TableSnapshot, value_col: str, cat_col: str,
                          how: str = "mean") -> tuple:
    """(category, aggregate-of-value) pairs over pairwise non-null rows."""
    _, values = snapshot.column(value_col)
    _, cats = snapshot.column(cat_col)
    groups: dict = {}
    for v, c in zip(values, cats):
        if v is None or c is None:
            continue
        groups.setdefault(_category_key(c), []).append(float(v))
    keys = sorted(groups, key=lambda k: (-len(groups[k]), k))[:CATEGORY_CAP]
    out = []
    for key in keys:
        vals = groups[key]
        if how == "sum":
            agg = float(np.sum(vals))
        elif how == "count":
            agg = float(len(vals))
        else:
            agg = float(np.mean(vals))
        out.append((key, agg))
    return tuple(out)


def pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.size < 3:
        raise DegenerateColumn("need at least 3 pairwise-complete rows")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateColumn("zero variance")
    return float(np.corrcoef(x, y)[0, 1])


def _pairwise_complete(snapshot, col_a, col_b):
    _, a = snapshot.column(col_a)
    _, b = snapshot.column(col_b)
    pairs = [(float(x), float(y)) for x, y in zip(a, b) if x is not None and y is not None]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def mine_correlation(snapshot: TableSnapshot, col_a: str, col_b: str,
                     node: str = "", threshold: float = DEFAULT_THRESHOLD,
                     ) -> DataFact | None:
    """Pearson correlation over pairwise-complete rows; facts below the
    strength threshold are suppressed."""
    xs, ys = _pairwise_complete(snapshot, col_a, col_b)
    try:
        r = pearson(xs, ys)
    except DegenerateColumn:
        return None
    if abs(r) < threshold:
        return None
    return DataFact(kind=CORRELATION, columns=(col_a, col_b), score=abs(r), node=node)


def _time_sort_key(value):
    if isinstance(value, str):
        probe = value[:-1] + "+00:00" if value.endswith("Z") else value
        for parser in (datetime.fromisoformat, date.fromisoformat):
            try:
                parsed = parser(probe)
                if isinstance(parsed, date) and not isinstance(parsed, datetime):
                    parsed = datetime(parsed.year, parsed.month, parsed.day)
                return parsed.replace(tzinfo=None).isoformat()
            except ValueError:
                continue
    return str(value)


def mine_trend(snapshot: TableSnapshot, temporal_col: str, value_col: str,
               node: str = "", threshold: float = DEFAULT_THRESHOLD,
               ) -> DataFact | None:
    """Trend strength = |Pearson r| between time rank and value."""
    _, times = snapshot.column(temporal_col)
    _, values = snapshot.column(value_col)
    rows = [(t, float(v), i) for i, (t, v) in enumerate(zip(times, values))
            if t is not None and v is not None]
    rows.sort(key=lambda r: (_time_sort_key(r[0]), r[2]))
    ranks = list(range(len(rows)))
    vals = [r[1] for r in rows]
    try:
        r = pearson(ranks, vals)
    except DegenerateColumn:
        return None
    score = abs(r)
    if score < threshold:
        return None
    return DataFact(kind=TREND, columns=(temporal_col, value_col), score=score, node=node)


def mine_node_facts(snapshot: TableSnapshot, profiles: list[ColumnProfile],
                    node: str = "", threshold: float = DEFAULT_THRESHOLD,
                    pair_cap: int = NUMERIC_PAIR_CAP):
    """All facts for one node: per-column distributions, numeric-pair
    correlations (capped by descending variance) and temporal trends."""
    dist_facts: list[tuple[DataFact, HistogramData]] = []
    for prof in profiles:
        if prof.distinct_count == 0:
            continue
        dist_facts.extend(mine_distribution(snapshot, prof.name, node, profiles))

    numeric = [p.name for p in profiles
               if p.dtype in ("int", "float") and p.distinct_count > 0]
    if len(numeric) > pair_cap:
        def variance(name):
            _, values = snapshot.column(name)
            present = [float(v) for v in values if v is not None]
            return float(np.var(present)) if present else 0.0
        numeric = sorted(numeric, key=lambda n: (-variance(n), n))[:pair_cap]
        numeric = [p.name for p in profiles if p.name in set(numeric)]

    corr_facts = []
    for i, a in enumerate(numeric):
        for b in numeric[i + 1:]:
            fact = mine_correlation(snapshot, a, b, node, threshold)
            if fact is not None:
                corr_facts.append(fact)

    trend_facts = []
    temporal = [p.name for p in profiles if p.is_temporal]
    for t in temporal:
        for p in profiles:
            if p.dtype not in ("int", "float") or p.name == t:
                continue
            fact = mine_trend(snapshot, t, p.name, node, threshold)
            if fact is not None:
                trend_facts.append(fact)
    return dist_facts, corr_facts, trend_facts
