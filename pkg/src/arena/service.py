"""Submission intake service: one router, two transports.

The router maps HTTP-style requests onto an :class:`arena.orchestrator.Arena`.
Simulations talk to it in process; ``serve`` exposes the same routes over a
socket with a virtual clock derived from wall time. The arena itself is the
serialization point, so the handler takes one lock around every request.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from .logio import write_log
from .orchestrator import Arena
from .scenario import Scenario

SUBMIT_KINDS = {"pov", "patch", "sarif", "bundle"}


def handle_request(
    arena: Arena, method: str, path: str, body: bytes | None, now: float
) -> tuple[int, dict[str, Any]]:
    """Route one request; returns (status, response document)."""
    parts = [p for p in path.split("/") if p]
    if parts[:1] == ["v1"]:
        parts = parts[1:]
    if method == "GET" and parts == ["status", "tasks"]:
        return 200, {"now": now, "tasks": arena.open_tasks(now)}
    if method == "POST" and len(parts) == 2 and parts[0] == "submit":
        kind = parts[1]
        if kind not in SUBMIT_KINDS:
            return 404, {"error": f"unknown submission kind {kind!r}"}
        if body is None:
            body = b""
        try:
            payload = json.loads(body.decode("utf-8")) if body else {}
        except (UnicodeDecodeError, json.JSONDecodeError):
            receipt = arena.accept_submission(body, now)
            return 400, asdict(receipt)
        if isinstance(payload, dict):
            payload.setdefault("type", kind)
            if payload["type"] != kind:
                return 400, {"error": "body type does not match endpoint"}
        receipt = arena.accept_submission(payload, now)
        return (200 if receipt.accepted else 400), asdict(receipt)
    return 404, {"error": "no such route"}


class InProcessClient:
    """Direct transport for tests and simulations; caller supplies the clock."""

    def __init__(self, arena: Arena):
        self.arena = arena

    def post(self, path: str, body: dict[str, Any], now: float) -> tuple[int, dict[str, Any]]:
        return handle_request(self.arena, "POST", path, json.dumps(body).encode(), now)

    def get(self, path: str, now: float) -> tuple[int, dict[str, Any]]:
        return handle_request(self.arena, "GET", path, None, now)


class ArenaServer:
    """Socket transport: virtual time = (wall time - start) * time_scale."""

    def __init__(self, scenario: Scenario, port: int = 0, time_scale: float = 1.0):
        if time_scale <= 0:
            raise ValueError("time_scale must be positive")
        self.arena = Arena(scenario)
        self.time_scale = time_scale
        self._lock = threading.Lock()
        self._started = time.monotonic()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def _respond(self, status: int, doc: dict[str, Any]) -> None:
                data = json.dumps(doc).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def _dispatch(self, method: str) -> None:
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length) if length else None
                with outer._lock:
                    status, doc = handle_request(
                        outer.arena, method, self.path, body, outer.now()
                    )
                self._respond(status, doc)

            def do_GET(self) -> None:  # noqa: N802 (http.server API)
                self._dispatch("GET")

            def do_POST(self) -> None:  # noqa: N802
                self._dispatch("POST")

            def log_message(self, *args: Any) -> None:
                pass  # keep stdout clean; the event log is the record

        self.httpd = ThreadingHTTPServer(("127.0.0.1", port), Handler)

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def now(self) -> float:
        return (time.monotonic() - self._started) * self.time_scale

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def shutdown(self, log_path: str | None = None) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if log_path is not None:
            with self._lock:
                write_log(log_path, self.arena.finish())


def serve(
    scenario: Scenario,
    port: int,
    time_scale: float = 1.0,
    log_path: str | None = None,
) -> None:
    """Run the intake service until the competition ends or interrupt."""
    server = ArenaServer(scenario, port=port, time_scale=time_scale)
    thread = server.start_background()
    end = scenario.end_time
    try:
        while server.now() <= end:
            time.sleep(min(1.0, max(0.01, (end - server.now()) / time_scale)))
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown(log_path)
        thread.join(timeout=5.0)
