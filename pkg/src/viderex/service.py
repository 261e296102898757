"""HTTP facade: route catalog, upload/download, live navigation sessions.

Control and catalog speak JSON; frames travel as binary PGM bodies; each
session's updates stream over a WebSocket in frame order, exactly once.

    GET    /routes                     catalog
    PUT    /routes/{name}              atomic upload {manifest, frames b64}
    GET    /routes/{name}              manifest
    GET    /routes/{name}/frames/{i}   frame bytes (PGM)
    POST   /sessions                   open a session on a route
    POST   /sessions/{id}/frames       submit one frame, returns the update
    WS     /sessions/{id}/updates      ordered update stream
    DELETE /sessions/{id}              close

Sessions idle longer than the TTL (default 10 minutes) expire and behave
as unknown ids.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import time
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .errors import CorruptRoute, DuplicateRoute, RouteNotFound, StoreError, ViderexError
from .nav import NavSession
from .route import RouteMemory, build_memory
from .store import RouteManifest, RouteStore, decode_pgm

DEFAULT_SESSION_TTL_S = 600.0

PGM_MEDIA_TYPE = "image/x-portable-graymap"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class _LiveSession:
    session_id: str
    route_name: str
    created_at: str
    nav: NavSession
    cond: asyncio.Condition
    last_active: float
    closed: bool = False


def _update_json(update) -> dict:
    return {
        "frame_seq": update.frame_seq,
        "best_index": update.best_index,
        "diff": update.diff,
        "tone_hz": update.tone_hz,
        "haptic": update.haptic,
    }


def create_app(store_root: Path, session_ttl_s: float = DEFAULT_SESSION_TTL_S) -> FastAPI:
    app = FastAPI(title="viderex", docs_url=None, redoc_url=None)
    store = RouteStore(Path(store_root))
    sessions: dict[str, _LiveSession] = {}
    memories: dict[str, RouteMemory] = {}

    app.state.store = store
    app.state.sessions = sessions

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=status)

    def get_memory(name: str) -> RouteMemory:
        if name not in memories:
            memories[name] = build_memory(store.load(name))
        return memories[name]

    def live(session_id: str) -> _LiveSession | None:
        sess = sessions.get(session_id)
        if sess is None:
            return None
        if time.monotonic() - sess.last_active > session_ttl_s:
            sess.closed = True
            sessions.pop(session_id, None)
            return None
        return sess

    # ------------------------------------------------------------ catalog

    @app.get("/routes")
    async def list_routes():
        return [
            {"name": name, "created_at": created, "frame_count": count}
            for name, created, count in store.list_routes()
        ]

    @app.put("/routes/{name}", status_code=201)
    async def upload_route(name: str, request: Request):
        try:
            payload = await request.json()
        except Exception:
            return error(400, "body must be JSON")
        try:
            manifest = RouteManifest.from_json_dict(payload["manifest"])
            frames = [base64.b64decode(b, validate=True) for b in payload["frames"]]
        except (KeyError, TypeError, ValueError, binascii.Error) as exc:
            return error(400, f"malformed upload: {exc}")
        if manifest.name != name:
            return error(400, "manifest name does not match URL")
        try:
            route_id = store.put_route(manifest, frames)
        except DuplicateRoute as exc:
            return error(409, str(exc))
        except (CorruptRoute, StoreError) as exc:
            return error(400, str(exc))
        memories.pop(name, None)
        return {"id": route_id}

    @app.get("/routes/{name}")
    async def get_route(name: str):
        try:
            return store.get_manifest(name).to_json_dict()
        except RouteNotFound as exc:
            return error(404, str(exc))

    @app.get("/routes/{name}/frames/{index}")
    async def get_frame(name: str, index: int):
        try:
            blob = store.get_frame_bytes(name, index)
        except RouteNotFound as exc:
            return error(404, str(exc))
        return Response(content=blob, media_type=PGM_MEDIA_TYPE)

    @app.delete("/routes/{name}", status_code=204)
    async def delete_route(name: str):
        try:
            store.delete(name)
        except RouteNotFound as exc:
            return error(404, str(exc))
        memories.pop(name, None)
        return Response(status_code=204)

    # ------------------------------------------------------------ sessions

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return error(400, "body must be JSON")
        route_name = payload.get("route_name")
        if not route_name:
            return error(400, "route_name is required")
        mode = payload.get("calibration", "fixed")
        if mode not in ("fixed", "running"):
            return error(400, "calibration must be 'fixed' or 'running'")
        try:
            memory = get_memory(route_name)
        except RouteNotFound as exc:
            return error(404, str(exc))
        kwargs = {}
        if "tone_min_hz" in payload:
            kwargs["f_min"] = float(payload["tone_min_hz"])
        if "tone_max_hz" in payload:
            kwargs["f_max"] = float(payload["tone_max_hz"])
        if "haptic_fraction" in payload:
            kwargs["haptic_fraction"] = float(payload["haptic_fraction"])
        try:
            nav = NavSession(memory, mode=mode, **kwargs)
        except (ViderexError, ValueError) as exc:
            return error(400, str(exc))
        session_id = uuid.uuid4().hex
        sessions[session_id] = _LiveSession(
            session_id=session_id,
            route_name=route_name,
            created_at=_now_iso(),
            nav=nav,
            cond=asyncio.Condition(),
            last_active=time.monotonic(),
        )
        sess = sessions[session_id]
        return {
            "session_id": sess.session_id,
            "route_name": sess.route_name,
            "created_at": sess.created_at,
        }

    @app.post("/sessions/{session_id}/frames")
    async def submit_frame(session_id: str, request: Request):
        sess = live(session_id)
        if sess is None:
            return error(404, "unknown session")
        body = await request.body()
        try:
            frame = decode_pgm(body)
        except StoreError as exc:
            return error(400, f"bad frame: {exc}")
        async with sess.cond:
            try:
                update = sess.nav.process_frame(frame, auto_preprocess=True)
            except ViderexError as exc:
                return error(400, str(exc))
            sess.last_active = time.monotonic()
            sess.cond.notify_all()
        return _update_json(update)

    @app.delete("/sessions/{session_id}", status_code=204)
    async def close_session(session_id: str):
        sess = live(session_id)
        if sess is None:
            return error(404, "unknown session")
        async with sess.cond:
            sess.closed = True
            sess.cond.notify_all()
        sessions.pop(session_id, None)
        return Response(status_code=204)

    @app.websocket("/sessions/{session_id}/updates")
    async def stream_updates(ws: WebSocket, session_id: str):
        sess = live(session_id)
        if sess is None:
            await ws.close(code=4404)
            return
        await ws.accept()
        next_seq = 0
        try:
            while True:
                async with sess.cond:
                    while next_seq >= len(sess.nav.history) and not sess.closed:
                        await sess.cond.wait()
                    pending = list(sess.nav.history[next_seq:])
                    closed = sess.closed
                for update in pending:
                    await ws.send_json(_update_json(update))
                    next_seq += 1
                if closed and next_seq >= len(sess.nav.history):
                    await ws.close()
                    return
        except WebSocketDisconnect:
            return

    return app


def run_server(store_root: Path, host: str = "127.0.0.1", port: int = 8471,
               session_ttl_s: float = DEFAULT_SESSION_TTL_S) -> None:
    """Blocking server entry point used by the CLI."""
    import uvicorn

    app = create_app(store_root, session_ttl_s=session_ttl_s)
    uvicorn.run(app, host=host, port=port, log_level="warning")
