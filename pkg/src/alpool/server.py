"""HTTP facade over labeling sessions, for the browser labeling UI.

Endpoints (JSON bodies throughout):

  POST /sessions                   config -> 201 {"session_id"}
  GET  /sessions                   -> {"sessions": [...]}
  GET  /sessions/{id}/batch        -> {batch_id, instances: [{id, text}], class_names}
  POST /sessions/{id}/labels       {batch_id, labels: [{id, label}]} -> {"status"}
  GET  /sessions/{id}/progress     -> {iteration, num_labeled, curve, status}

Training runs on a worker thread; clients poll progress until the status
leaves "training". Errors use structured bodies {"error", "detail"}; a
submission against anything but the pending batch answers 409 with error
code "stale_batch" so the UI can refetch and reconcile. Sessions are durable:
a restarted server replays each session's label log on first access.
"""
from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import oracle
from .config import ConfigError, build_plan
from .oracle import Session, SessionError, StaleBatchError

_SESSION_PATH = re.compile(r"^/sessions/([0-9a-zA-Z_-]+)/(batch|progress|labels)$")


class SessionHandle:
    """One session plus its lock and read snapshots.

    Mutations happen under the lock; reads go through the snapshot so that
    progress polls never block behind a training round.
    """

    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.error: str | None = None
        self.progress: dict = {}
        self.batch: dict | None = None
        self.refresh()

    def refresh(self) -> None:
        self.progress = self.session.progress()
        if self.error is not None:
            self.progress["status"] = "error"
            self.progress["detail"] = self.error
        self.batch = (
            self.session.pending_batch() if self.session.status == oracle.AWAITING else None
        )


class SessionManager:
    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self._handles: dict[str, SessionHandle] = {}
        self._registry_lock = threading.Lock()
        self._broken: dict[str, str] = {}

    def list_ids(self) -> list[str]:
        return oracle.list_sessions(self.store_dir)

    def create(self, config_raw: dict) -> SessionHandle:
        plan = build_plan(config_raw, self.store_dir)
        session = oracle.create_session(plan.base, plan.train, plan.test, self.store_dir)
        handle = SessionHandle(session)
        with self._registry_lock:
            self._handles[session.session_id] = handle
        return handle

    def get(self, session_id: str) -> SessionHandle:
        with self._registry_lock:
            handle = self._handles.get(session_id)
        if handle is not None:
            return handle
        if session_id in self._broken:
            raise SessionError(f"session {session_id} is corrupt: {self._broken[session_id]}")
        if session_id not in self.list_ids():
            raise KeyError(session_id)
        try:
            session = oracle.load_session(self.store_dir, session_id)
        except SessionError as exc:
            self._broken[session_id] = str(exc)
            raise
        handle = SessionHandle(session)
        with self._registry_lock:
            self._handles.setdefault(session_id, handle)
            return self._handles[session_id]

    def submit(self, session_id: str, batch_id: int, labels: list[tuple[int, int]]) -> dict:
        handle = self.get(session_id)
        with handle.lock:
            before = handle.session.batches_applied
            oracle.submit_labels(handle.session, batch_id, labels)
            fresh = handle.session.batches_applied != before
            handle.refresh()
        if fresh:
            threading.Thread(target=self._train, args=(handle,), daemon=True).start()
        return {"status": handle.progress["status"]}

    def _train(self, handle: SessionHandle) -> None:
        with handle.lock:
            try:
                oracle.advance(handle.session)
            except Exception as exc:  # surfaced via progress, sessions must not wedge the server
                handle.error = f"training failed: {exc}"
            handle.refresh()


class _Handler(BaseHTTPRequestHandler):
    manager: SessionManager  # set by make_server

    def log_message(self, *args) -> None:  # quiet by default
        pass

    def _reply(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, error: str, detail: str = "") -> None:
        self._reply(code, {"error": error, "detail": detail})

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise ValueError("empty request body")
        payload = json.loads(raw)
        if not isinstance(payload, dict):
            raise ValueError("request body must be a JSON object")
        return payload

    def do_OPTIONS(self) -> None:
        self._reply(200, {})

    def do_GET(self) -> None:
        if self.path == "/sessions":
            self._reply(200, {"sessions": self.manager.list_ids()})
            return
        match = _SESSION_PATH.match(self.path)
        if not match or match.group(2) == "labels":
            self._error(404, "not_found", self.path)
            return
        session_id, what = match.groups()
        try:
            handle = self.manager.get(session_id)
        except KeyError:
            self._error(404, "unknown_session", session_id)
            return
        except SessionError as exc:
            self._error(500, "corrupt_session", str(exc))
            return
        if what == "progress":
            self._reply(200, handle.progress)
        else:
            batch = handle.batch
            if batch is None:
                self._error(409, "no_pending_batch", handle.progress["status"])
            else:
                self._reply(200, batch)

    def do_POST(self) -> None:
        if self.path == "/sessions":
            try:
                payload = self._read_json()
                handle = self.manager.create(payload)
            except (ValueError, ConfigError) as exc:
                self._error(400, "invalid_config", str(exc))
                return
            self._reply(201, {"session_id": handle.session.session_id})
            return
        match = _SESSION_PATH.match(self.path)
        if not match or match.group(2) != "labels":
            self._error(404, "not_found", self.path)
            return
        session_id = match.group(1)
        try:
            payload = self._read_json()
            batch_id = int(payload["batch_id"])
            labels = [(int(e["id"]), int(e["label"])) for e in payload["labels"]]
        except (KeyError, TypeError, ValueError) as exc:
            self._error(400, "invalid_submission", str(exc))
            return
        try:
            self._reply(200, self.manager.submit(session_id, batch_id, labels))
        except KeyError:
            self._error(404, "unknown_session", session_id)
        except StaleBatchError as exc:
            self._error(409, "stale_batch", str(exc))
        except SessionError as exc:
            self._error(400, "invalid_submission", str(exc))
        except ValueError as exc:
            self._error(400, "invalid_session_config", str(exc))


def make_server(host: str, port: int, store_dir: str | Path) -> ThreadingHTTPServer:
    manager = SessionManager(store_dir)
    handler = type("BoundHandler", (_Handler,), {"manager": manager})
    server = ThreadingHTTPServer((host, port), handler)
    server.manager = manager  # type: ignore[attr-defined]
    return server


def serve_forever(host: str, port: int, store_dir: str | Path) -> None:
    server = make_server(host, port, store_dir)
    address = f"{server.server_address[0]}:{server.server_address[1]}"
    print(f"serving labeling sessions on http://{address} (store: {store_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
