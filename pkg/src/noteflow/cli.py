"""Command-line surface: analyze, recommend, trace, serve.

Exit codes: 0 success (possibly with warnings), 2 usage or input errors,
1 internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bundle import (build_bundle, bundle_graph, canonical_json_bytes, load_bundle,
                     recommendation_spec, serialize_bundle, trace_result_json)
from .charts import spec_from_json
from .config import load_config
from .errors import NoteflowError
from .graph import NodeId
from .pipeline import analyze
from .snapshots import load_manifest, load_snapshot
from .trace import trace


class InputError(Exception):
    """User-correctable problem; prints a diagnostic and exits 2."""


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoteflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noteflow")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full pipeline and write a bundle")
    p.add_argument("--notebook", required=True)
    p.add_argument("--trace", dest="trace_log", default=None,
                   help="execution log (trace.json) recorded by the capture harness")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--embed-data", action="store_true")
    p.add_argument("--config", default=None)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("recommend", help="print ranked charts for a node or cell")
    p.add_argument("--bundle", required=True)
    p.add_argument("--node", default=None)
    p.add_argument("--cell", type=int, default=None,
                   help="cell execution counter; merges the cell's tables")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--table", default=None)
    p.add_argument("--column", action="append", default=None)
    p.add_argument("--reason", action="append", default=None)
    p.set_defaults(handler=_cmd_recommend)

    p = sub.add_parser("trace", help="trace a pinned chart across the flow")
    p.add_argument("--bundle", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("--chart", type=int, default=None,
                   help="index into the node's ranked recommendations")
    p.add_argument("--spec", default=None, help="explicit chart spec JSON")
    p.add_argument("--snapshots", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_trace)

    p = sub.add_parser("serve", help="serve the bundle and UI over local HTTP")
    p.add_argument("--bundle", required=True)
    p.add_argument("--ui", default=None)
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--snapshots", default=None)
    p.set_defaults(handler=_cmd_serve)
    return parser


def _cmd_analyze(args) -> int:
    notebook = Path(args.notebook)
    if not notebook.is_file():
        raise InputError(f"notebook not found: {notebook}")
    snapshots = Path(args.snapshots)
    if not snapshots.is_dir():
        raise InputError(f"snapshots directory not found: {snapshots}")
    if args.trace_log and not Path(args.trace_log).is_file():
        raise InputError(f"trace log not found: {args.trace_log}")
    config = load_config(args.config)
    result = analyze(notebook, snapshots, args.trace_log, config=config)
    bundle = build_bundle(result, embed_data=args.embed_data)
    Path(args.out).write_bytes(serialize_bundle(bundle))
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {args.out}: {len(result.graph.nodes)} nodes, "
          f"{len(result.graph.edges)} edges")
    return 0


def _load_bundle_checked(path) -> dict:
    if not Path(path).is_file():
        raise InputError(f"bundle not found: {path}")
    return load_bundle(path)


def _rank_sort_key(rec: dict):
    key = rec.get("rank_key") or []
    nums = key[:7]
    tie = key[7:]
    return tuple(-v for v in nums) + tuple(tie)


def _cmd_recommend(args) -> int:
    bundle = _load_bundle_checked(args.bundle)
    if (args.node is None) == (args.cell is None):
        raise InputError("pass exactly one of --node or --cell")
    if args.node is not None:
        info = bundle["nodes"].get(args.node)
        if info is None:
            raise InputError(f"unknown node id: {args.node}")
        recs = list(info["recommendations"])
        recs = [dict(r, node=args.node) for r in recs]
        default_table = None
    else:
        cell_nodes = [n for n in bundle["graph"]["nodes"] if n["cell_exec"] == args.cell]
        if not cell_nodes:
            raise InputError(f"no nodes for cell execution {args.cell}")
        recs = []
        for node in cell_nodes:
            for r in bundle["nodes"][node["id"]]["recommendations"]:
                recs.append(dict(r, node=node["id"], variable=node["variable"]))
        recs.sort(key=_rank_sort_key)
        latest = max((n for n in cell_nodes if not n["is_display"]),
                     key=lambda n: (n["epoch"], n["line"]), default=None)
        default_table = latest["variable"] if latest else None

    recs = _filter_recs(recs, args.table, args.column, args.reason, default_table)
    if args.top is not None:
        recs = recs[:args.top]
    if args.json:
        print(json.dumps(recs, indent=2, sort_keys=True))
    else:
        for r in recs:
            chart = r["chart"]
            enc = chart["spec"]["encoding"]
            fields = ", ".join(f"{ch}={e.get('field', 'count')}"
                               for ch, e in sorted(enc.items()))
            tags = ";".join(t["reason"] + "/" + t.get("transform", t.get("fact_kind", ""))
                            for t in r["tags"])
            print(f"{r['node']}  #{r['rank']}  {chart['kind']}  {fields}  [{tags}]")
    return 0


def _filter_recs(recs, table, columns, reasons, default_table):
    table = table if table is not None else default_table
    columns = set(columns) if columns else None
    reasons = set(reasons) if reasons else None
    out = []
    for r in recs:
        variable = r.get("variable") or NodeId.parse(r["node"]).variable
        if table is not None and variable != table:
            continue
        if columns is not None:
            enc = r["chart"]["spec"]["encoding"]
            fields = {e.get("field") for e in enc.values() if e.get("field")}
            if not (fields & columns):
                continue
        if reasons is not None:
            names = set()
            for t in r["tags"]:
                detail = t.get("transform") or t.get("fact_kind") or ""
                names.update({t["reason"], detail, f"{t['reason']}/{detail}"})
            if not (names & reasons):
                continue
        out.append(r)
    return out


def _snapshots_for(bundle: dict, override: str | None) -> dict:
    snapshots_dir = override or bundle.get("inputs", {}).get("snapshots_dir")
    if not snapshots_dir or not Path(snapshots_dir).is_dir():
        raise InputError(f"snapshots directory not available: {snapshots_dir!r} "
                         "(pass --snapshots)")
    manifest = load_manifest(snapshots_dir)
    return {nid: load_snapshot(manifest, nid) for nid in manifest.entries}


def _cmd_trace(args) -> int:
    bundle = _load_bundle_checked(args.bundle)
    if (args.chart is None) == (args.spec is None):
        raise InputError("pass exactly one of --chart or --spec")
    try:
        node_id = NodeId.parse(args.node)
    except ValueError as exc:
        raise InputError(str(exc))
    if args.spec is not None:
        try:
            spec = spec_from_json(json.loads(args.spec))
        except (json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"bad chart spec: {exc}")
    else:
        spec = recommendation_spec(bundle, args.node, args.chart)
    graph = bundle_graph(bundle)
    snapshots = _snapshots_for(bundle, args.snapshots)
    result = trace(graph, node_id, spec, snapshots)
    payload = trace_result_json(result)
    Path(args.out).write_bytes(canonical_json_bytes(payload))
    counts = {}
    for entry in payload["nodes"].values():
        counts[entry["status"]] = counts.get(entry["status"], 0) + 1
    print(f"wrote {args.out}: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bundle_path = Path(args.bundle)
    bundle = _load_bundle_checked(bundle_path)
    bundle_bytes = bundle_path.read_bytes()
    snapshots = _snapshots_for(bundle, args.snapshots)
    app = create_app(bundle, bundle_bytes, snapshots, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
