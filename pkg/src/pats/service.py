"""HTTP+JSON wire API for selection sessions, consumed by the operator UI.

Sessions live in memory with an idle TTL; tree and saliency data are
immutable once computed, and mutations on one session are serialized by a
per-session lock.
"""

import threading
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, UploadFile
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import images
from .selection import SelectionError, SelectionSession, open_session, trace_outlines

DEFAULT_TTL_SECONDS = 30 * 60


class PixelBody(BaseModel):
    x: int
    y: int


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[SelectionSession, np.ndarray, threading.Lock]] = {}

    def _purge(self) -> None:
        now = time.monotonic()
        dead = [sid for sid, (s, _, _) in self._sessions.items() if now - s.last_touched > self.ttl]
        for sid in dead:
            del self._sessions[sid]

    def add(self, session: SelectionSession, snapshot: np.ndarray) -> None:
        with self._lock:
            self._purge()
            self._sessions[session.session_id] = (session, snapshot, threading.Lock())

    def get(self, sid: str):
        with self._lock:
            self._purge()
            if sid not in self._sessions:
                raise HTTPException(status_code=404, detail="unknown or expired session")
            session, snapshot, lock = self._sessions[sid]
            session.last_touched = time.monotonic()
            return session, snapshot, lock


def _view(session: SelectionSession, node_id=None, noop=False, reason=""):
    mask = session.mask()
    active_outline = []
    if session.active_node is not None:
        active_outline = trace_outlines(session.tree.node_mask(session.active_node))
    return {
        "node_id": node_id if node_id is not None else session.active_node,
        "active_node": session.active_node,
        "noop": noop,
        "reason": reason,
        "outline": active_outline,
        "mask_outline": trace_outlines(mask),
        "mask_pixels": int(mask.sum()),
    }


def create_app(ttl_seconds: float = DEFAULT_TTL_SECONDS, static_dir=None) -> FastAPI:
    app = FastAPI(title="pats selection service")
    store = SessionStore(ttl_seconds)
    app.state.store = store

    @app.post("/sessions")
    async def create_session(image: UploadFile):
        data = await image.read()
        try:
            img = images.load_rgb(data)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=f"cannot decode image: {exc}")
        session, snapshot = open_session(img)
        store.add(session, snapshot)
        return {"session_id": session.session_id, "width": session.width, "height": session.height}

    @app.get("/sessions/{sid}/saliency.png")
    def saliency_png(sid: str):
        _, snapshot, _ = store.get(sid)
        return Response(content=images.encode_png_gray(snapshot), media_type="image/png")

    @app.get("/sessions/{sid}/mask.png")
    def mask_png(sid: str):
        session, _, lock = store.get(sid)
        with lock:
            mask = session.mask()
        return Response(content=images.mask_to_png(mask), media_type="image/png")

    def _run(sid: str, op):
        session, _, lock = store.get(sid)
        with lock:
            try:
                result = op(session)
            except SelectionError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return _view(session, node_id=result.node_id, noop=result.noop, reason=result.reason)

    @app.post("/sessions/{sid}/click")
    def click(sid: str, body: PixelBody):
        return _run(sid, lambda s: s.click_select(body.x, body.y))

    @app.post("/sessions/{sid}/grow")
    def grow(sid: str):
        return _run(sid, lambda s: s.grow())

    @app.post("/sessions/{sid}/shrink")
    def shrink(sid: str, body: PixelBody):
        return _run(sid, lambda s: s.shrink(body.x, body.y))

    @app.post("/sessions/{sid}/add")
    def add(sid: str, body: PixelBody):
        return _run(sid, lambda s: s.add_part(body.x, body.y))

    @app.post("/sessions/{sid}/subtract")
    def subtract(sid: str, body: PixelBody):
        return _run(sid, lambda s: s.subtract_part(body.x, body.y))

    @app.post("/sessions/{sid}/reset")
    def reset(sid: str):
        return _run(sid, lambda s: s.reset())

    @app.post("/sessions/{sid}/delete")
    def delete(sid: str):
        return _run(sid, lambda s: s.delete_selection())

    @app.post("/sessions/{sid}/grasp-point")
    def grasp_point(sid: str, body: PixelBody):
        session, _, lock = store.get(sid)
        with lock:
            try:
                request = session.confirm_grasp_point(body.x, body.y)
            except SelectionError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return {
                "session_id": request.session_id,
                "point": {"x": request.point[0], "y": request.point[1]},
                "mask_pixels": int(request.mask.sum()),
                "width": session.width,
                "height": session.height,
            }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def default_static_dir():
    """frontend/dist next to the repository root, when present."""
    here = Path(__file__).resolve()
    for parent in here.parents:
        candidate = parent / "frontend" / "dist"
        if candidate.is_dir():
            return candidate
    return None
