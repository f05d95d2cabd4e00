"""HTTP session service: create sessions, converse, repair, observe, stream.

All endpoints live under /sessions and speak JSON. Every response event
carries a per-session sequence number (its position in the transcript), so
clients can detect gaps and resume the event stream from where they left off.
All operations on one session are funneled through a per-session lock; the
store can optionally persist transcripts to a directory and lazily
reconstruct sessions from them by replay after a restart.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Mapping

from fastapi import FastAPI, Header, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel

from . import session as sess
from .explain import ExplanationTemplateSet, templates_from_dict
from .intent import RuleSet, ruleset_from_dict
from .levels import DialogVariant, TransitionTable, tables_from_records
from .sim import SimError


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: str = ""):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def body(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


def _api_event(session_id: str, seq: int, event: sess.TranscriptEvent) -> dict:
    record = sess.event_to_record(event)
    return {"session_id": session_id, "seq": seq, **record}


@dataclass
class SessionEntry:
    session: sess.DialogSession
    lock: threading.Lock = field(default_factory=threading.Lock)
    created_at: str = ""


class SessionStore:
    """All live sessions, with optional transcript persistence.

    Server-level defaults (tables/templates/rules loaded from override files,
    extra named scenarios) apply to any session created without explicit
    per-request overrides.
    """

    def __init__(self, transcript_dir: str | Path | None = None, *,
                 default_tables: Mapping[DialogVariant, TransitionTable] | None = None,
                 default_templates: ExplanationTemplateSet | None = None,
                 default_rules: RuleSet | None = None,
                 extra_scenarios: Mapping[str, dict] | None = None):
        self._entries: dict[str, SessionEntry] = {}
        self._registry_lock = threading.Lock()
        self.transcript_dir = Path(transcript_dir) if transcript_dir else None
        self.default_tables = dict(default_tables or {})
        self.default_templates = default_templates
        self.default_rules = default_rules
        self.extra_scenarios = dict(extra_scenarios or {})
        if self.transcript_dir:
            self.transcript_dir.mkdir(parents=True, exist_ok=True)

    def create(self, variant: DialogVariant, scenario, seed: int, *,
               table: TransitionTable | None = None,
               templates: ExplanationTemplateSet | None = None,
               rules: RuleSet | None = None) -> SessionEntry:
        if isinstance(scenario, str) and scenario in self.extra_scenarios:
            scenario = self.extra_scenarios[scenario]
        session = sess.create_session(
            variant, scenario, seed,
            table=table if table is not None else self.default_tables.get(variant),
            templates=templates if templates is not None else self.default_templates,
            rules=rules if rules is not None else self.default_rules)
        entry = SessionEntry(
            session=session,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        with self._registry_lock:
            self._entries[session.id] = entry
        self._persist(entry)
        return entry

    def get(self, session_id: str) -> SessionEntry:
        with self._registry_lock:
            entry = self._entries.get(session_id)
        if entry is None:
            entry = self._restore(session_id)
        if entry is None:
            raise ApiError(404, "not_found", f"unknown session {session_id!r}")
        return entry

    def _persist(self, entry: SessionEntry) -> None:
        if self.transcript_dir:
            sess.write_transcript(entry.session,
                                  self.transcript_dir / f"{entry.session.id}.jsonl")

    def _restore(self, session_id: str) -> SessionEntry | None:
        """Reconstruct a session from its persisted transcript by replay."""
        if not self.transcript_dir:
            return None
        path = self.transcript_dir / f"{session_id}.jsonl"
        if not path.exists():
            return None
        replayed, divergence = sess.replay_transcript(path.read_text(encoding="utf-8"))
        if divergence is not None:
            raise ApiError(500, "replay_failed",
                           f"persisted transcript for {session_id!r} does not replay",
                           divergence.describe())
        entry = SessionEntry(session=replayed, created_at="")
        with self._registry_lock:
            self._entries.setdefault(session_id, entry)
            return self._entries[session_id]

    def mutate(self, session_id: str, fn) -> list[dict]:
        """Run a session mutation under the per-session lock; returns API events."""
        entry = self.get(session_id)
        with entry.lock:
            base = len(entry.session.transcript)
            events = fn(entry.session)
            self._persist(entry)
            return [
                _api_event(entry.session.id, base + i + 1, e)
                for i, e in enumerate(events)
            ]

    def snapshot(self, session_id: str) -> tuple[sess.DialogSession, int]:
        entry = self.get(session_id)
        with entry.lock:
            return entry.session, len(entry.session.transcript)

    def events_since(self, session_id: str, since: int) -> tuple[list[dict], str]:
        entry = self.get(session_id)
        with entry.lock:
            events = [
                _api_event(entry.session.id, i + 1, e)
                for i, e in enumerate(entry.session.transcript)
                if i + 1 > since
            ]
            return events, entry.session.status.value


class CreateSessionRequest(BaseModel):
    variant: str
    scenario: str | dict = "both_random_order"
    seed: int = 0
    table: list[dict] | None = None
    templates: dict | None = None
    rules: dict | None = None


class UtteranceRequest(BaseModel):
    text: str


class RepairRequest(BaseModel):
    action: dict


def _wrap_contract_errors(fn):
    try:
        return fn()
    except sess.SessionError as exc:
        raise ApiError(409, "conflict", str(exc)) from exc
    except SimError as exc:
        raise ApiError(400, type(exc).__name__, str(exc)) from exc
    except ValueError as exc:
        raise ApiError(400, "bad_request", str(exc)) from exc


def create_app(store: SessionStore | None = None) -> FastAPI:
    store = store if store is not None else SessionStore()
    app = FastAPI(title="robodialog", version="0.1.0")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.post("/sessions", status_code=201)
    def create_session_endpoint(req: CreateSessionRequest):
        try:
            variant = DialogVariant(req.variant)
        except ValueError:
            raise ApiError(400, "unknown_variant", f"unknown variant {req.variant!r}")

        def build():
            table = None
            if req.table is not None:
                table = tables_from_records(req.table).get(variant)
                if table is None:
                    raise ApiError(400, "bad_table",
                                   f"table config has no entries for {variant.value}")
            templates = templates_from_dict(req.templates) if req.templates else None
            rules = ruleset_from_dict(req.rules) if req.rules else None
            return store.create(variant, req.scenario, req.seed,
                                table=table, templates=templates, rules=rules)

        entry = _wrap_contract_errors(build)
        return {
            "session_id": entry.session.id,
            "created_at": entry.created_at,
            "variant": entry.session.variant.value,
            "scenario": entry.session.scenario,
            "seed": entry.session.seed,
        }

    @app.post("/sessions/{session_id}/utterance")
    def post_utterance_endpoint(session_id: str, req: UtteranceRequest):
        events = _wrap_contract_errors(
            lambda: store.mutate(session_id, lambda s: sess.handle_utterance(s, req.text)))
        return {"events": events}

    @app.post("/sessions/{session_id}/continue")
    def continue_endpoint(session_id: str):
        events = _wrap_contract_errors(
            lambda: store.mutate(session_id, sess.handle_continue))
        return {"events": events}

    @app.post("/sessions/{session_id}/repair")
    def repair_endpoint(session_id: str, req: RepairRequest):
        action = _wrap_contract_errors(lambda: sess.repair_action_from_wire(req.action))
        events = _wrap_contract_errors(
            lambda: store.mutate(session_id, lambda s: sess.handle_repair(s, action)))
        return {"events": events}

    @app.post("/sessions/{session_id}/advance")
    def advance_endpoint(session_id: str):
        events = _wrap_contract_errors(lambda: store.mutate(session_id, sess.advance))
        return {"events": events}

    @app.get("/sessions/{session_id}/state")
    def get_state_endpoint(session_id: str):
        snapshot, seq = store.snapshot(session_id)
        summary = sess.world_summary(snapshot)
        summary["session_id"] = snapshot.id
        summary["variant"] = snapshot.variant.value
        summary["seq"] = seq
        return summary

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript_endpoint(session_id: str):
        snapshot, _ = store.snapshot(session_id)
        return PlainTextResponse(sess.serialize_transcript(snapshot),
                                 media_type="application/x-ndjson")

    @app.get("/sessions/{session_id}/events")
    def events_endpoint(session_id: str, since: int = 0):
        events, status = store.events_since(session_id, since)
        return {"events": events, "status": status}

    @app.get("/sessions/{session_id}/stream")
    def events_stream_endpoint(session_id: str, since: int = 0,
                               last_event_id: str | None = Header(default=None)):
        store.get(session_id)  # 404 before the stream starts
        if last_event_id is not None:
            try:
                since = max(since, int(last_event_id))  # EventSource reconnect
            except ValueError:
                pass

        def generate() -> Iterator[str]:
            cursor = since
            while True:
                events, status = store.events_since(session_id, cursor)
                for event in events:
                    cursor = event["seq"]
                    yield f"id: {event['seq']}\ndata: {json.dumps(event, ensure_ascii=False)}\n\n"
                if status != sess.SessionStatus.RUNNING.value:
                    yield f"event: end\ndata: {json.dumps({'status': status})}\n\n"
                    return
                time.sleep(0.05)

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app


def run_server(host: str = "127.0.0.1", port: int = 8765,
               transcript_dir: str | None = None,
               store: SessionStore | None = None) -> None:
    import uvicorn

    if store is None:
        store = SessionStore(transcript_dir=transcript_dir)
    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
