"""HTTP facade for interactive cube sessions.

Each session holds an initial cube and the current state; operations arrive
as statement text or as structured documents.  Undo is replay from the
initial state, because destructors are irreversible.  Mutations on one
session are serialized by a per-session lock; a failed operation leaves the
session untouched.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Annotated, Any

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import algebra, cli, engine, io
from .algebra import OlapOp, render_steps
from .engine import CubeState
from .errors import CubeError


@dataclass
class Session:
    id: str
    initial: CubeState
    current: CubeState
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, state: CubeState) -> Session:
        session = Session(uuid.uuid4().hex, state, state)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return session

    def drop(self, session_id: str):
        with self._lock:
            if session_id not in self._sessions:
                raise HTTPException(status_code=404, detail=f"no session {session_id}")
            del self._sessions[session_id]


class CreateSessionBody(BaseModel):
    cubeDef: dict
    facts: str
    fill: str | None = None


class OpsBody(BaseModel):
    statement: str | None = None
    op: dict[str, Any] | None = None


class ReplayBody(BaseModel):
    prefixLength: int


def _schema_summary(state: CubeState) -> dict:
    dims = []
    for dim in state.dims:
        graph = state.schema.graph(dim)
        dims.append({
            "name": dim,
            "bottomLevel": graph.bottom_level,
            "levels": list(graph.schema.levels),
            "levelEdges": [list(e) for e in graph.schema.edges],
            "members": {lv: list(ms) for lv, ms in graph.level_domains.items()},
            "bottomOrder": list(graph.bottom_domain),
        })
    return {
        "dimensions": dims,
        "measures": list(state.protected_names),
        "computedMeasures": list(state.computed_names()),
        "cellCount": state.cell_count,
        "flaggedCellCount": state.flag_count(),
        "destroyedCellCount": state.destroyed_count(),
    }


def _parse_op(body: OpsBody) -> OlapOp:
    if (body.statement is None) == (body.op is None):
        raise CubeError("provide exactly one of 'statement' or 'op'")
    if body.op is not None:
        return io.op_from_doc(body.op)
    stmt = cli.parse_statement(body.statement)
    if not isinstance(stmt, cli.OpStatement):
        raise CubeError("only operation statements can be posted to /ops")
    return stmt.op


def _op_response(state: CubeState, entry: engine.OpLogEntry) -> dict:
    return {
        "flaggedCellCount": state.flag_count(),
        "destroyedCellCount": state.destroyed_count(),
        "measures": list(state.measure_names()),
        "stepTrace": {
            "description": entry.description,
            "steps": render_steps(entry.steps, len(state.dims), entry.base),
        },
    }


def _replay(session: Session, prefix: int) -> CubeState:
    state = session.initial
    for entry in session.current.op_log[:prefix]:
        state = engine.apply_sequence(state, entry.steps, entry.description)
    return state


def create_app() -> FastAPI:
    app = FastAPI(title="cubealg", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()
    app.state.sessions = store

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            fill = io.parse_rational(body.fill) if body.fill is not None else Fraction(0)
            state = io.load_cube(body.cubeDef, body.facts, fill)
        except CubeError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session = store.create(state)
        return {"sessionId": session.id, "schemaSummary": _schema_summary(state)}

    @app.get("/sessions/{session_id}/schema")
    def get_schema(session_id: str):
        session = store.get(session_id)
        return _schema_summary(session.current)

    @app.post("/sessions/{session_id}/ops")
    def post_op(session_id: str, body: OpsBody):
        session = store.get(session_id)
        with session.lock:
            try:
                op = _parse_op(body)
                new_state = algebra.apply_op(session.current, op)
            except CubeError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            session.current = new_state
        return _op_response(new_state, new_state.op_log[-1])

    @app.get("/sessions/{session_id}/view")
    def get_view(
        session_id: str,
        row: str,
        col: str,
        measure: str,
        fixed: Annotated[list[str] | None, Query()] = None,
        approx: int | None = None,
    ):
        session = store.get(session_id)
        state = session.current
        fixed_map = {}
        for item in fixed or []:
            if "=" not in item:
                raise HTTPException(status_code=422, detail=f"fixed needs Dim=member, got {item!r}")
            dim, member = item.split("=", 1)
            fixed_map[dim] = member
        try:
            return io.export_view(state, row, col, fixed_map, measure, approx)
        except CubeError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        session = store.get(session_id)
        state = session.current
        return {
            "entries": [
                {
                    "description": entry.description,
                    "steps": render_steps(entry.steps, len(state.dims), entry.base),
                }
                for entry in state.op_log
            ]
        }

    @app.post("/sessions/{session_id}/replay", status_code=201)
    def replay(session_id: str, body: ReplayBody):
        session = store.get(session_id)
        with session.lock:
            if not 0 <= body.prefixLength <= len(session.current.op_log):
                raise HTTPException(
                    status_code=422,
                    detail=f"prefixLength must be in 0..{len(session.current.op_log)}",
                )
            state = _replay(session, body.prefixLength)
        new_session = store.create(state)
        new_session.initial = session.initial
        return {"sessionId": new_session.id, "schemaSummary": _schema_summary(state)}

    @app.get("/sessions/{session_id}/selfcheck")
    def selfcheck(session_id: str):
        session = store.get(session_id)
        with session.lock:
            replayed = _replay(session, len(session.current.op_log))
            ok = replayed == session.current
        return {"ok": ok, "operations": len(session.current.op_log)}

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        store.drop(session_id)

    return app
