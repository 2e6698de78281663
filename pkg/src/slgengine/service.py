"""HTTP facade over libraries, runs, steering, and synthesis.

All payloads are JSON.  Runs live in memory; pass ``snapshot_dir`` to also
write each finished or aborted run's trace to disk for audit.  Event pushing
is a plain text/event-stream with the ``seq`` key in every message; polling
``GET /runs/{id}/trace?since=seq`` is the fallback contract.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import HTMLResponse, PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .checker import check_library
from .dot import graph_to_dot
from .interpreter import (
    Engine,
    EngineError,
    EngineStateError,
    UncheckedGraphError,
    UnknownRunError,
    command_from_json,
)
from .model import (
    GraphLibrary,
    UnresolvedTypeError,
    graph_from_json,
    graph_to_json,
    interface_to_json,
    library_to_json,
)
from .registry import ActivityRegistry
from .runtime import RuntimeFault, value_from_json
from .specs import spec_from_json
from .synthesis import MaterializeError, Solution, materialize, synthesize

UI_DIR = Path(__file__).resolve().parent.parent.parent / "frontend"


def solution_to_json(solution: Solution | None) -> dict:
    if solution is None:
        return {"minimalLength": None, "sequences": []}
    return {
        "minimalLength": solution.length,
        "sequences": [list(seq) for seq in solution.sequences],
    }


def create_app(
    lib: GraphLibrary,
    registry: ActivityRegistry,
    snapshot_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="process-engine", version="0.1.0")
    engine = Engine(lib, registry)
    app.state.engine = engine
    snapshots = Path(snapshot_dir) if snapshot_dir else None
    snapshotted: set[str] = set()

    def body_dict(payload: object) -> dict:
        if not isinstance(payload, dict):
            raise HTTPException(400, "request body must be a JSON object")
        return payload

    def get_run_or_404(run_id: str):
        try:
            return engine.get_run(run_id)
        except UnknownRunError as exc:
            raise HTTPException(404, str(exc)) from exc

    def maybe_snapshot(run) -> None:
        if snapshots is None or run.status not in ("finished", "aborted"):
            return
        if run.run_id in snapshotted:
            return
        snapshots.mkdir(parents=True, exist_ok=True)
        doc = dict(run.status_json())
        doc["events"] = [e.to_json() for e in run.trace]
        (snapshots / f"{run.run_id}.json").write_text(
            json.dumps(doc, sort_keys=True, indent=2), encoding="utf-8"
        )
        snapshotted.add(run.run_id)

    # -- library ---------------------------------------------------------------

    @app.get("/library")
    def get_library() -> dict:
        return library_to_json(lib)

    @app.post("/library/check")
    def post_library_check() -> list[dict]:
        return [d.to_json() for d in check_library(lib)]

    # -- graphs ------------------------------------------------------------------

    @app.get("/graphs")
    def list_graphs(
        implements: str | None = Query(default=None),
        runId: str | None = Query(default=None),
    ) -> list[dict]:
        view = get_run_or_404(runId).lib_view() if runId else lib
        if implements is not None:
            if implements not in view.interfaces:
                raise HTTPException(404, f"unknown interface {implements!r}")
            graphs = view.implementers(implements)
        else:
            graphs = [view.services[g] for g in sorted(view.services)]
        return [
            {"id": g.id, "implements": g.implements_id, "docs": g.docs} for g in graphs
        ]

    @app.get("/graphs/{graph_id}")
    def get_graph(graph_id: str, runId: str | None = Query(default=None)) -> dict:
        view = get_run_or_404(runId).lib_view() if runId else lib
        if graph_id in view.services:
            doc = graph_to_json(view.services[graph_id])
            doc.update({"id": graph_id, "kind": "service"})
            return doc
        if graph_id in view.interfaces:
            doc = interface_to_json(view.interfaces[graph_id])
            doc.update({"id": graph_id, "kind": "interface"})
            return doc
        raise HTTPException(404, f"unknown graph {graph_id!r}")

    @app.get("/graphs/{graph_id}/dot")
    def get_graph_dot(graph_id: str, runId: str | None = Query(default=None)) -> PlainTextResponse:
        view = get_run_or_404(runId).lib_view() if runId else lib
        if graph_id not in view.services:
            raise HTTPException(404, f"unknown service graph {graph_id!r}")
        return PlainTextResponse(graph_to_dot(view.services[graph_id], view))

    @app.post("/graphs")
    def upload_graph(payload: dict = Body(...)) -> dict:
        payload = body_dict(payload)
        run_id = payload.get("runId")
        graph_id = payload.get("id")
        if not isinstance(run_id, str) or not isinstance(graph_id, str):
            raise HTTPException(400, "upload needs runId and id")
        run = get_run_or_404(run_id)
        graph, issues = graph_from_json(graph_id, payload.get("graph"))
        if graph is None or issues:
            raise HTTPException(
                422, detail=[i.to_json() for i in issues] or "malformed graph document"
            )
        try:
            engine.upload_graph(run_id, graph)
        except UncheckedGraphError as exc:
            raise HTTPException(422, detail=[d.to_json() for d in exc.diagnostics]) from exc
        except EngineError as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        return {"accepted": True, "id": graph_id, "runId": run_id}

    # -- runs -------------------------------------------------------------------

    @app.post("/runs")
    def post_run(payload: dict = Body(...)) -> dict:
        payload = body_dict(payload)
        graph_id = payload.get("graphId")
        if not isinstance(graph_id, str):
            raise HTTPException(400, "runs need a graphId")
        inputs_obj = payload.get("inputs", [])
        if not isinstance(inputs_obj, list):
            raise HTTPException(400, "inputs must be a list of values")
        try:
            inputs = [value_from_json(v, lib) for v in inputs_obj]
        except RuntimeFault as exc:
            raise HTTPException(400, str(exc)) from exc
        try:
            run_id = engine.start_run(graph_id, inputs)
        except UncheckedGraphError as exc:
            raise HTTPException(422, detail=[d.to_json() for d in exc.diagnostics]) from exc
        except UnresolvedTypeError as exc:
            raise HTTPException(404, str(exc)) from exc
        except EngineError as exc:
            raise HTTPException(400, str(exc)) from exc
        return {"runId": run_id}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        return get_run_or_404(run_id).status_json()

    @app.post("/runs/{run_id}/step")
    def post_step(run_id: str, n: int = Query(default=1, ge=1, le=100000)) -> dict:
        run = get_run_or_404(run_id)
        if run.status != "running":
            raise HTTPException(409, f"run is {run.status}")
        stepped = 0
        for _ in range(n):
            if run.status != "running":
                break
            engine.step(run_id)
            stepped += 1
        maybe_snapshot(run)
        out = run.status_json()
        out["stepped"] = stepped
        return out

    @app.get("/runs/{run_id}/trace")
    def get_trace(run_id: str, since: int = Query(default=0, ge=0)) -> list[dict]:
        run = get_run_or_404(run_id)
        return [e.to_json() for e in run.events_since(since)]

    @app.get("/runs/{run_id}/events")
    def get_events(run_id: str) -> StreamingResponse:
        run = get_run_or_404(run_id)

        def stream():
            sent = 0
            idle = 0.0
            while True:
                events = run.events_since(sent)
                for event in events:
                    sent = event.seq
                    yield f"data: {json.dumps(event.to_json(), sort_keys=True)}\n\n"
                if run.status in ("finished", "aborted") and not run.events_since(sent):
                    return
                if not events:
                    time.sleep(0.05)
                    idle += 0.05
                    if idle > 300:
                        return
                else:
                    idle = 0.0

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/runs/{run_id}/command")
    def post_command(run_id: str, payload: dict = Body(...)) -> dict:
        run = get_run_or_404(run_id)
        try:
            command = command_from_json(body_dict(payload))
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        result = engine.submit_command(run_id, command)
        if not result.accepted:
            if "not paused" in result.reason:
                raise HTTPException(409, result.reason)
            raise HTTPException(422, result.reason)
        maybe_snapshot(run)
        return {"accepted": True}

    # -- synthesis ----------------------------------------------------------------

    @app.post("/synthesize")
    def post_synthesize(payload: dict = Body(...)) -> dict:
        try:
            spec = spec_from_json(body_dict(payload))
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        if spec.interface_id not in lib.interfaces:
            raise HTTPException(404, f"unknown interface {spec.interface_id!r}")
        solution = synthesize(spec)
        out = solution_to_json(solution)
        out["graph"] = None
        if solution is not None:
            try:
                graph = materialize(solution.sequences[0], spec, lib)
            except MaterializeError as exc:
                raise HTTPException(422, str(exc)) from exc
            doc = graph_to_json(graph)
            doc["id"] = graph.id
            out["graph"] = doc
        return out

    # -- UI ----------------------------------------------------------------------

    if (UI_DIR / "index.html").exists():
        app.mount("/ui", StaticFiles(directory=UI_DIR, html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def index() -> HTMLResponse:
            return HTMLResponse('<meta http-equiv="refresh" content="0; url=/ui/">')

    return app
