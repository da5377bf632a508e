"""HTTP facade over the dialogue engine.

Endpoints: create a session, post a message to it, read its snapshot, and
validate a knowledge-base document.  Sessions live in memory, expire after an
idle timeout, and are serialized per session so concurrent posts to the same
conversation cannot interleave.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .engine import (
    ConflictPolicy,
    DialogueEngine,
    Phase,
    SessionState,
    SessionTerminatedError,
    event_to_dict,
)
from .kb import (
    InvalidKbError,
    KbDocument,
    KbParseError,
    build_document,
    validate_kb,
)
from .matching import MatcherConfig

DEFAULT_IDLE_TTL = 30.0 * 60.0
DEFAULT_MESSAGE_CAP = 500
DEFAULT_GREETING = "Hello! Tell me about your situation and ask your question."


@dataclass
class SessionRecord:
    session_id: str
    state: SessionState
    created_at: float
    last_active: float
    transcript: list[dict[str, Any]] = field(default_factory=list)
    message_count: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory session map with idle expiry.

    Ids carry 192 bits of entropy, so they double as unguessable capability
    tokens.  Expired records are dropped lazily on access and on create.
    """

    def __init__(self, idle_ttl: float = DEFAULT_IDLE_TTL, clock=time.time):
        self._idle_ttl = idle_ttl
        self._clock = clock
        self._records: dict[str, SessionRecord] = {}
        self._guard = threading.Lock()

    def _expired(self, record: SessionRecord, now: float) -> bool:
        return now - record.last_active > self._idle_ttl

    def sweep(self) -> None:
        now = self._clock()
        with self._guard:
            stale = [sid for sid, rec in self._records.items() if self._expired(rec, now)]
            for sid in stale:
                del self._records[sid]

    def create(self, state: SessionState) -> SessionRecord:
        self.sweep()
        now = self._clock()
        record = SessionRecord(
            session_id=secrets.token_urlsafe(24),
            state=state,
            created_at=now,
            last_active=now,
        )
        with self._guard:
            self._records[record.session_id] = record
        return record

    def get(self, session_id: str) -> SessionRecord | None:
        now = self._clock()
        with self._guard:
            record = self._records.get(session_id)
            if record is None:
                return None
            if self._expired(record, now):
                del self._records[session_id]
                return None
            return record


class MessageIn(BaseModel):
    text: str


def create_app(
    kb: KbDocument,
    matcher_config: MatcherConfig | None = None,
    conflict_policy: ConflictPolicy = ConflictPolicy.KEEP_FIRST,
    idle_ttl: float = DEFAULT_IDLE_TTL,
    message_cap: int = DEFAULT_MESSAGE_CAP,
    allow_origin: str | None = None,
    clock=time.time,
) -> FastAPI:
    """Build the service application around one knowledge base.

    A knowledge base that fails validation does not prevent startup; session
    creation answers 503 until a valid one is served.  The validation
    endpoint works either way.
    """
    report = validate_kb(kb)
    engine: DialogueEngine | None = None
    if report.ok:
        engine = DialogueEngine(kb, matcher_config, conflict_policy)
    store = SessionStore(idle_ttl=idle_ttl, clock=clock)
    greeting = str(kb.metadata.get("greeting") or DEFAULT_GREETING)

    app = FastAPI(title="argudialog", docs_url=None, redoc_url=None)
    if allow_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[allow_origin] if allow_origin != "*" else ["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.get("/api/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok" if engine is not None else "invalid-kb",
            "kb_title": kb.metadata.get("title"),
        }

    @app.post("/api/sessions", status_code=201)
    def create_session() -> dict[str, Any]:
        if engine is None:
            raise HTTPException(503, "the knowledge base failed validation")
        record = store.create(engine.start_session())
        return {"session_id": record.session_id, "greeting": greeting}

    def _record_or_404(session_id: str) -> SessionRecord:
        record = store.get(session_id)
        if record is None:
            raise HTTPException(404, "unknown or expired session")
        return record

    @app.post("/api/sessions/{session_id}/messages")
    def post_message(session_id: str, message: MessageIn) -> dict[str, Any]:
        record = _record_or_404(session_id)
        if not message.text.strip():
            raise HTTPException(422, "text must be nonempty")
        assert engine is not None  # sessions cannot exist without an engine
        with record.lock:
            if record.state.phase is Phase.TERMINATED:
                raise HTTPException(409, "the session has already ended")
            if record.message_count >= message_cap:
                raise HTTPException(429, "session message limit reached")
            try:
                events = engine.handle_utterance(record.state, message.text)
            except SessionTerminatedError:
                raise HTTPException(409, "the session has already ended")
            record.message_count += 1
            record.last_active = clock()
            wire_events = [event_to_dict(e) for e in events]
            record.transcript.append({"direction": "user", "text": message.text})
            record.transcript.extend(
                {"direction": "system", "event": e} for e in wire_events
            )
            return {
                "events": wire_events,
                "phase": record.state.phase.value,
                "last_reply": record.state.last_reply,
            }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        record = _record_or_404(session_id)
        with record.lock:
            return {
                "phase": record.state.phase.value,
                "activated": list(record.state.activated),
                "last_reply": record.state.last_reply,
                "transcript": list(record.transcript),
            }

    @app.post("/api/kb/validate")
    async def validate_document(request: Request) -> JSONResponse:
        body = await request.body()
        try:
            doc = build_document(body, strict=False)
        except KbParseError as exc:
            return JSONResponse(status_code=400, content=exc.report.to_dict())
        return JSONResponse(status_code=200, content=validate_kb(doc).to_dict())

    return app


__all__ = [
    "create_app",
    "SessionStore",
    "SessionRecord",
    "DEFAULT_IDLE_TTL",
    "DEFAULT_MESSAGE_CAP",
    "InvalidKbError",
]
