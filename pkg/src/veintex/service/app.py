"""HTTP+JSON edit service over annotation sessions."""

from __future__ import annotations

import uuid

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..errors import PrerequisiteMissing, StaleVersion, VeintexError
from ..markup import serialize_document
from ..sessions import Session, get_analysis, open_session
from .models import (
    EditAccepted,
    EditRequest,
    Health,
    OpenSessionRequest,
    SessionCreated,
    SessionInfo,
    ViewPayload,
    ViewResponse,
)


class SessionStore:
    def __init__(self):
        self.sessions: dict[str, Session] = {}

    def add(self, session: Session):
        self.sessions[session.session_id] = session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"no session {session_id!r}")
        return session


def create_app(config=None) -> FastAPI:
    """Build the service; config may preload documents as sessions."""
    app = FastAPI(title="veintex annotation service", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore()
    app.state.store = store

    if config is not None:
        _preload(store, config)

    @app.exception_handler(StaleVersion)
    async def stale_version(_, exc: StaleVersion):
        return JSONResponse(status_code=409, content={
            "error": "StaleVersion", "detail": str(exc),
            "currentVersion": exc.expected})

    @app.exception_handler(PrerequisiteMissing)
    async def prerequisite_missing(_, exc: PrerequisiteMissing):
        return JSONResponse(status_code=422, content={
            "error": "PrerequisiteMissing", "detail": str(exc)})

    @app.exception_handler(VeintexError)
    async def domain_error(_, exc: VeintexError):
        return JSONResponse(status_code=400, content={
            "error": type(exc).__name__, "detail": str(exc)})

    @app.get("/health", response_model=Health)
    def health():
        return Health(status="ok", sessions=len(store.sessions))

    @app.post("/sessions", response_model=SessionCreated, status_code=201)
    def create_session(request: OpenSessionRequest):
        session_id = uuid.uuid4().hex[:12]
        session = open_session(
            request.hub,
            [v.model_dump() for v in request.views],
            plain_text=request.plainText,
            session_id=session_id)
        store.add(session)
        return SessionCreated(sessionId=session_id, version=session.version,
                              activeView=session.active_view)

    @app.get("/sessions", response_model=list[SessionInfo])
    def list_sessions():
        return [SessionInfo(sessionId=s.session_id, version=s.version,
                            activeView=s.active_view)
                for s in store.sessions.values()]

    @app.get("/sessions/{session_id}/view", response_model=ViewResponse)
    def get_view(session_id: str, view: str | None = Query(default=None)):
        session = store.get(session_id)
        doc = session.effective(view)
        return ViewResponse(sessionId=session_id, version=session.version,
                            viewId=view or session.active_view,
                            document=serialize_document(doc).decode("utf-8"))

    @app.post("/sessions/{session_id}/edits", response_model=EditAccepted)
    def post_edit(session_id: str, request: EditRequest):
        session = store.get(session_id)
        result = session.apply_edit(request.version, request.edit)
        return EditAccepted(version=result.version, created=result.created,
                            modified=result.modified, deleted=result.deleted,
                            summary=result.summary)

    @app.get("/sessions/{session_id}/analysis")
    def analysis(session_id: str, kind: str = Query(default="comparison")):
        session = store.get(session_id)
        return get_analysis(session, kind)

    return app


def _preload(store: SessionStore, config):
    from ..viewio import parse_manifest
    from pathlib import Path

    for doc_input in config.docs:
        hub_path = Path(doc_input.hub_path)
        views = []
        for view_path in doc_input.view_paths:
            view_path = Path(view_path)
            manifest = parse_manifest(view_path.read_text("utf-8"), str(view_path))
            payload = ""
            if manifest["payload"]:
                payload = (view_path.parent / manifest["payload"]).read_text("utf-8")
            views.append(ViewPayload(view=manifest["view"],
                                     parents=manifest["parents"],
                                     payload=payload).model_dump())
        session = open_session(hub_path.read_text("utf-8"), views,
                               session_id=hub_path.stem, hub_id=hub_path.stem)
        store.add(session)
