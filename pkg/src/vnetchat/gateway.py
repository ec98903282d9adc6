"""HTTP gateway exposing sessions, prompts, steps, stateless
interpretation, and evaluation runs."""

from __future__ import annotations

import json
import os
import threading

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import fixtures
from .evaluation import run_sweep
from .intent import KeywordExtractor, LlmExtractor, HttpLlmClient, SvmExtractor
from .model import TopologyError, load_topology, load_users, serialize_topology
from .session import (Session, SessionConfig, SessionError, create_session,
                      run_step, step_result_doc, submit_prompt)

LISTEN_ADDR_ENV = "VNET_LISTEN_ADDR"
DEFAULT_ADDR = "127.0.0.1:8080"


def api_error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    body = {"code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


class SessionStore:
    """In-memory sessions with a single-writer lock per session."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._mutex = threading.Lock()

    def add(self, session: Session):
        with self._mutex:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def get(self, sid: str) -> Session | None:
        return self._sessions.get(sid)

    def lock(self, sid: str) -> threading.Lock:
        return self._locks[sid]


class CreateSessionBody(BaseModel):
    topology: dict | None = None
    fixture: str | None = None
    users: list[dict]
    config: dict = {}


class PromptBody(BaseModel):
    user_id: int
    text: str


class InterpretBody(BaseModel):
    text: str
    extractor: str = "keyword"


class EvalBody(BaseModel):
    dataset: str = "appendix_a"
    extractor: str = "keyword"
    train_sizes: list[int]
    seed: int = 0


def _build_config(doc: dict) -> SessionConfig:
    kwargs = {}
    if "weights" in doc:
        kwargs["weights"] = tuple(doc["weights"])
    if "rates" in doc:
        kwargs["rates"] = tuple(doc["rates"])
    for key in ("extractor", "mode", "llm_shots"):
        if key in doc:
            kwargs[key] = doc[key]
    return SessionConfig(**kwargs)


def _stateless_extractor(kind: str):
    if kind == "keyword":
        return KeywordExtractor()
    if kind == "svm":
        return SvmExtractor(fixtures.appendix_dataset())
    if kind == "llm":
        return LlmExtractor(HttpLlmClient(), fixtures.llm_template(),
                            examples=fixtures.appendix_dataset()[:30])
    raise ValueError(f"unknown extractor {kind!r}")


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="vnetchat gateway")
    store = SessionStore()
    app.state.store = store

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/sessions", status_code=201)
    def post_session(body: CreateSessionBody):
        try:
            if body.fixture:
                topology = fixtures.topology(body.fixture)
            elif body.topology is not None:
                topology = load_topology(json.dumps(body.topology))
            else:
                return api_error(400, "bad-request", "topology or fixture required")
            users, params = load_users(json.dumps(body.users))
            config = _build_config(body.config)
        except (TopologyError, ValueError, FileNotFoundError) as exc:
            return api_error(400, "bad-request", str(exc))
        try:
            session = create_session(topology, users, params, config)
        except SessionError as exc:
            return api_error(409, "infeasible", str(exc))
        except TopologyError as exc:
            return api_error(400, "bad-request", str(exc))
        store.add(session)
        return {"session_id": session.id,
                "standing": step_result_doc(session.standing)}

    @app.post("/api/sessions/{sid}/prompts", status_code=202)
    def post_prompt(sid: str, body: PromptBody):
        session = store.get(sid)
        if session is None:
            return api_error(404, "not-found", f"no session {sid}")
        try:
            position = submit_prompt(session, body.user_id, body.text)
        except KeyError as exc:
            return api_error(400, "bad-request", str(exc))
        return {"position": position}

    @app.post("/api/sessions/{sid}/step")
    def post_step(sid: str):
        session = store.get(sid)
        if session is None:
            return api_error(404, "not-found", f"no session {sid}")
        lock = store.lock(sid)
        if not lock.acquire(blocking=False):
            return api_error(409, "conflict", "a step is already running")
        try:
            result = run_step(session)
        finally:
            lock.release()
        return step_result_doc(result)

    @app.get("/api/sessions/{sid}/state")
    def get_state(sid: str):
        session = store.get(sid)
        if session is None:
            return api_error(404, "not-found", f"no session {sid}")
        latest = session.history[-1] if session.history else session.standing
        return {
            "session_id": session.id,
            "k": session.chat_step,
            "params": {str(u): [p.cpu_param, p.latency_bound]
                       for u, p in session.params.items()},
            "allocation": step_result_doc(latest)["allocation"],
            "measurement": step_result_doc(latest)["measurement"],
            "standing": step_result_doc(session.standing),
            "history": [step_result_doc(r) for r in session.history],
            "pending": [{"user": u, "text": t} for u, t in session.pending],
            "users": [{"id": u.id, "router": u.router, "traffic_gbps": u.traffic}
                      for u in session.users],
        }

    @app.get("/api/sessions/{sid}/topology")
    def get_topology(sid: str):
        session = store.get(sid)
        if session is None:
            return api_error(404, "not-found", f"no session {sid}")
        return json.loads(serialize_topology(session.topology))

    @app.post("/api/interpret")
    def post_interpret(body: InterpretBody):
        if not body.text.strip():
            return api_error(400, "bad-request", "empty text")
        try:
            extractor = _stateless_extractor(body.extractor)
        except ValueError as exc:
            return api_error(400, "bad-request", str(exc))
        except RuntimeError as exc:
            # llm without an endpoint still degrades to (0,0) per contract
            return {"marker": {"cpu": 0, "latency_bound": 0},
                    "diagnostics": {"extractor": body.extractor,
                                    "unavailable": True, "syntax_error": False,
                                    "elapsed": 0.0, "note": str(exc)}}
        marker, diag = extractor.extract(body.text)
        return {"marker": {"cpu": marker.cpu, "latency_bound": marker.latency_bound},
                "diagnostics": diag.to_dict()}

    @app.post("/api/eval")
    def post_eval(body: EvalBody):
        try:
            samples = fixtures.appendix_dataset() if body.dataset == "appendix_a" \
                else None
            if samples is None:
                return api_error(400, "bad-request", f"unknown dataset {body.dataset!r}")
            if body.extractor == "llm":
                try:
                    client = HttpLlmClient()
                except RuntimeError as exc:
                    return api_error(503, "upstream-unavailable", str(exc))
                rows = run_sweep(samples, "llm", body.train_sizes, seed=body.seed,
                                 llm_client=client, llm_template=fixtures.llm_template())
            else:
                rows = run_sweep(samples, body.extractor, body.train_sizes,
                                 seed=body.seed)
        except ValueError as exc:
            return api_error(400, "bad-request", str(exc))
        return [{
            "extractor": r.extractor, "train_size": r.train_size,
            "mean_time_s": r.mean_time,
            "precision": list(r.precision), "recall": list(r.recall),
            "balanced_accuracy": list(r.balanced_accuracy),
            "syntax_error_pct": list(r.syntax_error_pct),
        } for r in rows]

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):
        return api_error(500, "internal", str(exc))

    if static_dir is None:
        candidate = os.path.join(os.path.dirname(__file__), "..", "..",
                                 "frontend", "dist")
        static_dir = candidate if os.path.isdir(candidate) else None
    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app
