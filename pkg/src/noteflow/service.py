"""Read-only HTTP service over an analyzed bundle.

Serves the canonical bundle bytes, computes traces on demand, and hosts the
companion UI's static assets. All served state is immutable after load, so
concurrent requests are safe by construction.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .bundle import bundle_graph, recommendation_spec, trace_result_json
from .errors import BundleFormatError, NoteflowError, SpecSchemaMismatch, UnknownNode
from .graph import NodeId
from .trace import trace


class Substitution(BaseModel):
    from_column: str = Field(alias="from")
    to_column: str | None = Field(alias="to", default=None)
    edge: str

    model_config = {"populate_by_name": True}


class TraceNodeEntry(BaseModel):
    status: str
    change: str
    color: str
    chart: dict | None = None
    data: list[dict] | None = None
    substitutions: list[Substitution] | None = None
    reason: str | None = None


class TraceResponse(BaseModel):
    pinned_node: str
    chart: dict
    nodes: dict[str, TraceNodeEntry]


class ErrorResponse(BaseModel):
    error: str


def create_app(bundle: dict, bundle_bytes: bytes, snapshots: dict,
               ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="noteflow", docs_url=None, redoc_url=None)
    graph = bundle_graph(bundle)

    @app.get("/bundle.json")
    def get_bundle() -> Response:
        return Response(content=bundle_bytes, media_type="application/json")

    @app.get("/trace", response_model=TraceResponse,
             responses={400: {"model": ErrorResponse}})
    def get_trace(node: str = Query(...), chart: int = Query(0)):
        try:
            node_id = NodeId.parse(node)
            spec = recommendation_spec(bundle, node, chart)
            result = trace(graph, node_id, spec, snapshots)
        except (ValueError, BundleFormatError, UnknownNode, SpecSchemaMismatch,
                NoteflowError) as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return trace_result_json(result)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
