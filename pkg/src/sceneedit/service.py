"""HTTP JSON service exposing interactive editing sessions.

One writer per session: concurrent mutations answer 409 instead of queuing
so the caller sees the contention. Every mutation is appended to the session
op log before the response is sent.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from sceneedit.config import RunConfig
from sceneedit.editing import (
    EditContext,
    EditSession,
    _object_base_centroid,
    dispatch,
    load_scene,
    rotate,
    translate,
)


def _base_centroid_of(session: EditSession, tag: str) -> list[float]:
    return [float(x) for x in _object_base_centroid(session.scene, tag)]
from sceneedit.errors import (
    AllBackendsFailed,
    AmbiguousPrompt,
    BackendError,
    EmptyHistory,
    InvalidTask,
    IoError,
    NoFeasibleLocation,
    NotFound,
    SceneEditError,
    SchemaViolation,
    UnknownTag,
)
from sceneedit.mesh.io import export_glb
from sceneedit.nlp import EditTask, LanguageModelClient, classify_and_extract

logger = logging.getLogger(__name__)

_STATUS = (
    (NotFound, 404),
    (UnknownTag, 404),
    (EmptyHistory, 409),
    (InvalidTask, 422),
    (AmbiguousPrompt, 422),
    (SchemaViolation, 422),
    (NoFeasibleLocation, 422),
    (AllBackendsFailed, 502),
    (BackendError, 502),
    (IoError, 422),
)


def _status_for(exc: SceneEditError) -> int:
    for cls, code in _STATUS:
        if isinstance(exc, cls):
            return code
    return 500


class CreateSession(BaseModel):
    scene: str
    annotations: str | None = None


class EditRequest(BaseModel):
    prompt: str | None = None
    kind: str | None = None
    primary: list[str] = Field(default_factory=list)
    grounding: str | None = None


class TranslateRequest(BaseModel):
    tag: str
    points: list[list[float]]


class RotateRequest(BaseModel):
    tag: str
    angle: float          # radians
    direction: str = "ccw"


def create_app(config: RunConfig | None = None) -> FastAPI:
    config = config or RunConfig()
    app = FastAPI(title="sceneedit", version="0.1.0")
    sessions: dict[str, tuple[EditSession, EditContext]] = {}
    app.state.sessions = sessions

    nlp_client = None
    if config.nlp == "client":
        nlp_client = LanguageModelClient(endpoint="http://localhost:0/classify")

    @app.exception_handler(SceneEditError)
    def _scene_error(_, exc: SceneEditError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    def _session(session_id: str) -> tuple[EditSession, EditContext]:
        found = sessions.get(session_id)
        if found is None:
            raise NotFound(f"unknown session {session_id!r}")
        return found

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession):
        scene_path = Path(body.scene)
        if not scene_path.exists():
            raise IoError(f"scene file does not exist: {scene_path}")
        scene = load_scene(scene_path, body.annotations, unit_scale=config.unit_scale)
        session = EditSession(scene, seed=config.seed)
        sessions[session.id] = (session, EditContext.from_run_config(config))
        return {"id": session.id}

    @app.get("/sessions/{session_id}/mesh")
    def get_mesh(session_id: str):
        session, _ = _session(session_id)
        return Response(content=export_glb(session.scene.mesh),
                        media_type="model/gltf-binary")

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, body: EditRequest):
        session, ctx = _session(session_id)
        if body.prompt:
            task = classify_and_extract(body.prompt, backend=config.nlp, client=nlp_client)
        elif body.kind:
            task = EditTask.from_json({
                "kind": body.kind,
                "primary": body.primary,
                "grounding": body.grounding or "",
            })
        else:
            raise InvalidTask("edit request needs either a prompt or a structured task")
        if not session.acquire_writer():
            return JSONResponse(status_code=409,
                                content={"error": "SessionBusy",
                                         "detail": "another edit is in flight"})
        try:
            outcomes = dispatch(session, task, ctx)
        finally:
            session.release_writer()
        return {"task": task.to_json(), "outcomes": [o.to_json() for o in outcomes]}

    @app.post("/sessions/{session_id}/translate")
    def post_translate(session_id: str, body: TranslateRequest):
        session, _ = _session(session_id)
        if not session.acquire_writer():
            return JSONResponse(status_code=409,
                                content={"error": "SessionBusy",
                                         "detail": "another edit is in flight"})
        try:
            outcome = translate(session, body.tag, body.points)
        finally:
            session.release_writer()
        payload = outcome.to_json()
        payload["base_centroid"] = _base_centroid_of(session, body.tag)
        return payload

    @app.post("/sessions/{session_id}/rotate")
    def post_rotate(session_id: str, body: RotateRequest):
        session, _ = _session(session_id)
        if body.direction not in ("cw", "ccw"):
            raise InvalidTask(f"direction must be cw or ccw, got {body.direction!r}")
        if not session.acquire_writer():
            return JSONResponse(status_code=409,
                                content={"error": "SessionBusy",
                                         "detail": "another edit is in flight"})
        try:
            outcome = rotate(session, body.tag, body.angle, body.direction)
        finally:
            session.release_writer()
        payload = outcome.to_json()
        payload["base_centroid"] = _base_centroid_of(session, body.tag)
        return payload

    @app.post("/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        session, _ = _session(session_id)
        if not session.acquire_writer():
            return JSONResponse(status_code=409,
                                content={"error": "SessionBusy",
                                         "detail": "another edit is in flight"})
        try:
            session.undo()
        finally:
            session.release_writer()
        return {"history_depth": len(session.history)}

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        session, _ = _session(session_id)
        placement = session.last_placement
        if placement is None:
            return {"levels": None, "grids": []}
        return {
            "levels": placement.levels,
            "location": [float(x) for x in placement.location],
            "cell_index": list(placement.cell_index),
            "grids": placement.trace_json(),
        }

    @app.get("/sessions/{session_id}/tags")
    def get_tags(session_id: str):
        session, _ = _session(session_id)
        registry = session.scene.object_registry
        return {"tags": {tag: {"label": rec.label} for tag, rec in sorted(registry.items())}}

    return app


def serve(config: RunConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host="127.0.0.1", port=config.port, log_level="info")
