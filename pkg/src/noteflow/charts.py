"""Declarative chart specs (mark + encodings) and their serialized form.

The serialized grammar is Vega-Lite-compatible JSON so any standard renderer
can draw the specs; internally the five mark names stay domain-specific.
"""

from __future__ import annotations

from dataclasses import dataclass

HISTOGRAM = "histogram"
BAR = "bar"
LINE = "line"
SCATTER = "scatter"
HEATMAP = "heatmap"

QUANTITATIVE = "quantitative"
NOMINAL = "nominal"
TEMPORAL = "temporal"

_VEGA_MARKS = {HISTOGRAM: "bar", BAR: "bar", LINE: "line",
               SCATTER: "point", HEATMAP: "rect"}


@dataclass(frozen=True, order=True)
class Encoding:
    field: str | None = None          # None encodes the record count
    type: str = QUANTITATIVE
    bin: bool = False
    aggregate: str | None = None      # count | mean | sum

    @property
    def is_count(self) -> bool:
        return self.field is None and self.aggregate == "count"


def count_encoding() -> Encoding:
    return Encoding(field=None, type=QUANTITATIVE, aggregate="count")


@dataclass(frozen=True, order=True)
class ChartSpec:
    mark: str
    x: Encoding
    y: Encoding
    color: Encoding | None = None

    def fields(self) -> tuple[str, ...]:
        out = []
        for enc in (self.x, self.y, self.color):
            if enc is not None and enc.field is not None and enc.field not in out:
                out.append(enc.field)
        return tuple(out)


def validate_spec(spec: ChartSpec) -> list[str]:
    """Machine-checkable mark invariants; empty list means valid."""
    problems = []
    x, y = spec.x, spec.y
    if spec.mark == HISTOGRAM:
        if not (x.bin and x.type == QUANTITATIVE):
            problems.append("histogram x must be binned quantitative")
        if not y.is_count:
            problems.append("histogram y must be the record count")
    elif spec.mark == BAR:
        if x.type != NOMINAL:
            problems.append("bar x must be nominal")
        if not (y.is_count or y.aggregate in ("mean", "sum")):
            problems.append("bar y must be a count or aggregate")
    elif spec.mark == SCATTER:
        if x.type != QUANTITATIVE or y.type != QUANTITATIVE or x.bin or y.bin:
            problems.append("scatter needs unbinned quantitative x and y")
    elif spec.mark == LINE:
        if x.type not in (TEMPORAL, QUANTITATIVE, NOMINAL) or x.bin:
            problems.append("line x must be a plain ordered axis")
        if y.type != QUANTITATIVE:
            problems.append("line y must be quantitative")
    elif spec.mark == HEATMAP:
        if x.type != NOMINAL or y.type != NOMINAL:
            problems.append("heatmap axes must be nominal")
    else:
        problems.append(f"unknown mark {spec.mark!r}")
    if spec.color is not None and spec.color.type != NOMINAL:
        problems.append("color encoding must be nominal")
    return problems


def _encoding_json(enc: Encoding) -> dict:
    out: dict = {}
    if enc.field is not None:
        out["field"] = enc.field
    out["type"] = enc.type
    if enc.bin:
        out["bin"] = True
    if enc.aggregate is not None:
        out["aggregate"] = enc.aggregate
    return out


def spec_to_json(spec: ChartSpec) -> dict:
    encoding = {"x": _encoding_json(spec.x), "y": _encoding_json(spec.y)}
    if spec.color is not None:
        encoding["color"] = _encoding_json(spec.color)
    if spec.mark == HEATMAP:
        encoding["color"] = {"aggregate": "count", "type": QUANTITATIVE}
    return {"kind": spec.mark, "spec": {"mark": _VEGA_MARKS[spec.mark], "encoding": encoding}}


def _encoding_from_json(obj: dict) -> Encoding:
    return Encoding(field=obj.get("field"), type=obj.get("type", QUANTITATIVE),
                    bin=bool(obj.get("bin", False)), aggregate=obj.get("aggregate"))


def spec_from_json(obj: dict) -> ChartSpec:
    kind = obj["kind"]
    encoding = obj["spec"]["encoding"]
    color = None
    if "color" in encoding and kind != HEATMAP:
        color = _encoding_from_json(encoding["color"])
    return ChartSpec(mark=kind, x=_encoding_from_json(encoding["x"]),
                     y=_encoding_from_json(encoding["y"]), color=color)
