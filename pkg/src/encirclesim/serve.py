"""Interactive serve mode: the closed loop ticking live over WebSocket.

A human pilots the escaping target while the agents keep running the
estimator and controller unchanged; operator commands only ever replace the
target's own displacement, never anything the agents see, so the
non-cooperative sensing contract is preserved.

Protocol (text frames, JSON): the server sends {"t":"hello",...} once, then
{"t":"state", ...trace columns..., "cooldown","paused","manual"} per tick plus
{"t":"warning"|"paused"|"reset"|"lock"} events. Clients send {"t":"steer",
"vx","vy"}, {"t":"boost"}, {"t":"pause"}, {"t":"reset"}. Steering is exclusive
to the oldest connected client; everyone else spectates. Unknown or malformed
messages get a warning frame and never crash the loop.

The single event loop serializes all state: commands mutate pending fields,
the ticker applies them between ticks, frames are fanned out without blocking
on slow consumers.
"""

from __future__ import annotations

import asyncio
import http
import json
import math
from collections import deque
from pathlib import Path

import numpy as np
from websockets.asyncio.server import ServerConnection, broadcast, serve
from websockets.datastructures import Headers
from websockets.http11 import Response

from . import analysis, trace_io
from .scenario import ScenarioConfig
from .simulate import SimEngine, StepRecord, TargetOverride

PROTOCOL_SCHEMA = 1
HISTORY_LEN = 300

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class Session:
    """All live state for one serve process: engine, clients, operator input."""

    def __init__(self, cfg: ScenarioConfig, seed: int | None, tick_hz: float,
                 max_manual_speed: float | None):
        cfg.validate()
        self.cfg = cfg
        self.seed = seed
        self.tick_hz = float(tick_hz)
        # fast enough to outrun the drift model, far from a teleport
        self.max_manual = (float(max_manual_speed) if max_manual_speed is not None
                           else cfg.target.drift_amp * 25.0)
        self.engine = SimEngine(cfg, seed)
        self.paused = False
        self.manual_engaged = False
        self.manual_vel = np.zeros(2)
        self.pending_boost = False
        self.history: deque[dict] = deque(maxlen=HISTORY_LEN)
        self.clients: dict[ServerConnection, int] = {}
        self._next_client = 1
        self._gates = analysis.evaluate_gates(cfg).to_dict()

    # -- lock bookkeeping ---------------------------------------------------

    def lock_holder(self) -> ServerConnection | None:
        return next(iter(self.clients), None)

    # -- simulation ---------------------------------------------------------

    def _frame_cooldown(self, k: int) -> int:
        last = self.engine.last_impulse_k
        if last is None:
            return 0
        return max(0, last + self.cfg.target.gap_min - k)

    def _boost_vector(self) -> np.ndarray:
        cap = self.cfg.target.impulse_max
        speed = float(np.linalg.norm(self.manual_vel))
        if self.manual_engaged and speed > 0.0:
            return cap * self.manual_vel / speed  # per-axis components <= cap
        return cap * self.engine.rng.uniform(0.0, 1.0, size=2)

    def _drift(self, k: int) -> np.ndarray:
        t = self.cfg.target
        return t.drift_amp * np.array([math.cos(t.drift_freq * k),
                                       math.sin(t.drift_freq * k)])

    def tick(self) -> dict | None:
        """Advance one tick unless paused; returns the state frame to send."""
        if self.paused:
            return None
        boost_now = False
        if self.pending_boost:
            self.pending_boost = False
            boost_now = self.engine.boost_cooldown() == 0
        steering = self.manual_engaged and self.lock_holder() is not None
        override = None
        if steering or boost_now:
            h = self._clamped_manual() if steering else self._drift(self.engine.k)
            if boost_now:
                h = h + self._boost_vector()
            override = TargetOverride(h=h, impulse=boost_now)
        rec = self.engine.step(override)
        frame = self.state_frame(rec)
        self.history.append(frame)
        return frame

    def _clamped_manual(self) -> np.ndarray:
        speed = float(np.linalg.norm(self.manual_vel))
        if speed <= self.max_manual:
            return self.manual_vel.copy()
        return self.manual_vel * (self.max_manual / speed)

    def reset(self) -> None:
        self.engine = SimEngine(self.cfg, self.seed)
        self.paused = False
        self.manual_engaged = False
        self.manual_vel = np.zeros(2)
        self.pending_boost = False
        self.history.clear()

    # -- frames ---------------------------------------------------------------

    def state_frame(self, rec: StepRecord) -> dict:
        frame: dict = {"t": "state"}
        for col, v in zip(trace_io.COLUMNS, trace_io.record_to_values(rec)):
            frame[col] = int(v) if col in ("k", "impulse", "sat1", "sat2") else float(v)
        frame["cooldown"] = self._frame_cooldown(rec.k)
        frame["paused"] = self.paused
        frame["manual"] = self.manual_engaged
        return frame

    def hello_frame(self, conn: ServerConnection) -> dict:
        return {
            "t": "hello",
            "schema": PROTOCOL_SCHEMA,
            "config": self.cfg.to_dict(),
            "seed": self.engine.seed,
            "tick_hz": self.tick_hz,
            "max_manual_speed": self.max_manual,
            "gap_min": self.cfg.target.gap_min,
            "radius": self.cfg.controller.radius,
            "gates": self._gates,
            "steering": conn is self.lock_holder(),
            "history": list(self.history),
        }

    # -- client messages ------------------------------------------------------

    async def handle_message(self, conn: ServerConnection, raw) -> None:
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, TypeError, UnicodeDecodeError):
            await self._warn(conn, "malformed JSON frame ignored")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("t"), str):
            await self._warn(conn, "frame must be an object with a string 't'")
            return
        t = msg["t"]
        if t not in ("steer", "boost", "pause", "reset"):
            await self._warn(conn, f"unknown message type: {t}")
            return
        if conn is not self.lock_holder():
            await self._warn(conn, "steering is locked by another client")
            return

        if t == "steer":
            vx, vy = msg.get("vx"), msg.get("vy")
            vals = [0.0 if v is None else v for v in (vx, vy)]
            if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
                await self._warn(conn, "steer vx/vy must be finite numbers or null")
                return
            self.manual_vel = np.array(vals, dtype=float)
            self.manual_engaged = True
        elif t == "boost":
            cd = self._frame_cooldown(self.engine.k)
            if cd > 0:
                await self._warn(conn, f"boost ignored: cooldown {cd} ticks")
            else:
                self.pending_boost = True
        elif t == "pause":
            self.paused = not self.paused
            broadcast(self.clients, json.dumps({"t": "paused", "paused": self.paused}))
        elif t == "reset":
            self.reset()
            broadcast(self.clients, json.dumps({"t": "reset"}))

    async def _warn(self, conn: ServerConnection, message: str) -> None:
        try:
            await conn.send(json.dumps({"t": "warning", "message": message}))
        except Exception:  # noqa: BLE001 - client may already be gone
            pass

    # -- connection lifecycle ---------------------------------------------------

    async def handler(self, conn: ServerConnection) -> None:
        self.clients[conn] = self._next_client
        self._next_client += 1
        try:
            await conn.send(json.dumps(self.hello_frame(conn)))
            async for raw in conn:
                await self.handle_message(conn, raw)
        finally:
            had_lock = conn is self.lock_holder()
            self.clients.pop(conn, None)
            if had_lock:
                # operator left: target reverts to autonomous motion
                self.manual_engaged = False
                self.manual_vel = np.zeros(2)
                new_holder = self.lock_holder()
                if new_holder is not None:
                    await self._send_quiet(new_holder,
                                           {"t": "lock", "steering": True})

    async def _send_quiet(self, conn: ServerConnection, obj: dict) -> None:
        try:
            await conn.send(json.dumps(obj))
        except Exception:  # noqa: BLE001
            pass

    async def ticker(self) -> None:
        loop = asyncio.get_running_loop()
        period = 1.0 / self.tick_hz
        next_t = loop.time()
        while True:
            next_t += period
            delay = next_t - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_t = loop.time()  # fell behind; don't burst-fire ticks
            frame = self.tick()
            if frame is not None and self.clients:
                broadcast(self.clients, json.dumps(frame))


def _static_response(ui_dir: Path, path: str) -> Response:
    name = path.lstrip("/") or "index.html"
    target = (ui_dir / name).resolve()
    if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
        return Response(404, "Not Found", Headers({"Content-Type": "text/plain"}),
                        b"not found\n")
    ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
    return Response(200, "OK", Headers({"Content-Type": ctype}), target.read_bytes())


async def serve_session(session: Session, host: str, port: int,
                        ui_dir: str | None = None,
                        ready: asyncio.Future | None = None) -> None:
    ui_path = Path(ui_dir) if ui_dir else None

    def process_request(conn: ServerConnection, request):
        path = request.path.split("?", 1)[0]
        if path == "/ws":
            return None  # proceed with the WebSocket handshake
        if ui_path is None:
            return conn.respond(http.HTTPStatus.NOT_FOUND,
                                "no UI bundle configured; WebSocket endpoint is /ws\n")
        return _static_response(ui_path, path)

    async with serve(session.handler, host, port,
                     process_request=process_request) as server:
        actual_port = server.sockets[0].getsockname()[1]
        print(f"listening on ws://{host}:{actual_port}/ws", flush=True)
        if ui_path is not None:
            print(f"ui at http://{host}:{actual_port}/", flush=True)
        if ready is not None:
            ready.set_result(actual_port)
        tick_task = asyncio.create_task(session.ticker())
        try:
            await asyncio.Future()  # run until cancelled
        finally:
            tick_task.cancel()


def run_server(cfg: ScenarioConfig, seed: int | None, host: str, port: int,
               tick_hz: float, max_manual_speed: float | None,
               ui_dir: str | None) -> int:
    session = Session(cfg, seed, tick_hz, max_manual_speed)
    try:
        asyncio.run(serve_session(session, host, port, ui_dir))
    except KeyboardInterrupt:
        pass
    return 0
