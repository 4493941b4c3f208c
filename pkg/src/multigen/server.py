"""Authoritative real-time multiplayer server.

One exclusive writer task per world (the tick loop); connection handlers
only fill per-session action slots and queue joins/leaves, all on the same
event loop, so the advance phase never races a reader. Readouts and
broadcasts are computed from the post-advance immutable snapshot.

Wire protocol: newline-delimited JSON over TCP, every message tagged
``{"v": "multigen/1", "type": ...}``. Browsers connect to the same port via
an HTTP WebSocket upgrade (one JSON document per text frame); plain GETs are
served from ``static_dir`` so the bundled web client can be hosted directly.
"""

from __future__ import annotations

import asyncio
import base64
import json
import mimetypes
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import ws
from .dynamics import Action, MotionConfig, advance_world
from .mapdata import WorldMap, map_to_document
from .observation import ViewConfig, render_frame, viewpoint_readout
from .replay import ReplayHeader, ReplayWriter
from .world import (
    WorldError,
    WorldState,
    add_player,
    canonical_hash,
    new_world,
    remove_player,
)

PROTOCOL_VERSION = "multigen/1"


@dataclass
class SessionConfig:
    map: WorldMap
    seed: int = 0
    host: str = "127.0.0.1"
    port: int = 7777
    tick_rate: float = 20.0
    max_players: int = 8
    action_deadline: float = 0.5  # fraction of the tick period
    motion: MotionConfig = field(default_factory=MotionConfig)
    view: ViewConfig = field(default_factory=ViewConfig)
    record_path: str | None = None
    render_mode: str = "readout"  # "readout" or "frames"
    static_dir: str | None = None

    def __post_init__(self):
        if self.tick_rate <= 0:
            raise ValueError("tick_rate must be positive")
        if self.max_players < 1:
            raise ValueError("max_players must be at least 1")
        if not (0.0 < self.action_deadline < 1.0):
            raise ValueError("action_deadline must be a fraction of the tick period")
        if self.render_mode not in ("readout", "frames"):
            raise ValueError("render_mode must be 'readout' or 'frames'")


class _LineTransport:
    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter, first: str | None = None):
        self._reader = reader
        self._writer = writer
        self._first = first

    async def recv(self) -> str | None:
        if self._first is not None:
            line, self._first = self._first, None
            return line
        try:
            raw = await self._reader.readline()
        except ConnectionError:
            return None
        if not raw:
            return None
        return raw.decode("utf-8").rstrip("\n")

    def send(self, text: str) -> None:
        self._writer.write(text.encode("utf-8") + b"\n")

    async def close(self) -> None:
        try:
            self._writer.close()
            await self._writer.wait_closed()
        except (ConnectionError, OSError):
            pass


class _WsTransport:
    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self._reader = reader
        self._writer = writer

    async def recv(self) -> str | None:
        return await ws.read_text_message(self._reader, self._writer)

    def send(self, text: str) -> None:
        self._writer.write(ws.encode_text(text))

    async def close(self) -> None:
        try:
            self._writer.write(ws.encode_frame(ws.OP_CLOSE, b""))
            self._writer.close()
            await self._writer.wait_closed()
        except (ConnectionError, OSError):
            pass


class _PlayerSession:
    def __init__(self, player_id: str, transport):
        self.player_id = player_id
        self.transport = transport
        self.latest_action: Action | None = None
        self.connected = True

    def send(self, text: str) -> None:
        if not self.connected:
            return
        try:
            self.transport.send(text)
        except (ConnectionError, OSError):
            self.connected = False


def _error_line(code: str, detail: str) -> str:
    return json.dumps(
        {"v": PROTOCOL_VERSION, "type": "error", "code": code, "detail": detail},
        separators=(",", ":"),
    )


class GameServer:
    def __init__(self, cfg: SessionConfig):
        self.cfg = cfg
        self.state: WorldState = new_world(cfg.map, cfg.seed)
        self.sessions: dict[str, _PlayerSession] = {}
        self._pending_joins: list[tuple[str, _PlayerSession]] = []
        self._pending_leaves: list[str] = []
        self._next_player = 1
        self._server: asyncio.base_events.Server | None = None
        self._tick_task: asyncio.Task | None = None
        self._recorder: ReplayWriter | None = None
        self._record_file = None
        self._map_doc_json = json.dumps(map_to_document(cfg.map), separators=(",", ":"))
        self._stopped = asyncio.Event()
        self.tick_durations: list[float] = []

    @property
    def port(self) -> int:
        assert self._server is not None
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        if self.cfg.record_path:
            self._record_file = open(self.cfg.record_path, "w", encoding="utf-8")
            self._recorder = ReplayWriter(self._record_file)
            self._recorder.header(
                ReplayHeader(
                    map=self.cfg.map,
                    seed=self.cfg.seed,
                    motion=self.cfg.motion,
                    view=self.cfg.view,
                    tick_rate=self.cfg.tick_rate,
                )
            )
        self._server = await asyncio.start_server(self._handle_conn, self.cfg.host, self.cfg.port)
        self._tick_task = asyncio.get_running_loop().create_task(self._tick_loop())

    async def stop(self) -> None:
        if self._tick_task is not None:
            self._tick_task.cancel()
            try:
                await self._tick_task
            except asyncio.CancelledError:
                pass
        for session in list(self.sessions.values()):
            session.send(json.dumps({"v": PROTOCOL_VERSION, "type": "bye"}, separators=(",", ":")))
            await session.transport.close()
        self.sessions.clear()
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        if self._recorder is not None:
            self._recorder.finish(self.state)
            self._record_file.close()
            self._recorder = None
        self._stopped.set()

    async def serve_until_stopped(self) -> None:
        await self._stopped.wait()

    # -- connection handling ------------------------------------------------

    async def _handle_conn(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            first = await reader.readexactly(1)
        except (asyncio.IncompleteReadError, ConnectionError):
            writer.close()
            return
        if first == b"G":
            await self._handle_http(reader, writer)
            return
        try:
            rest = await reader.readline()
        except ConnectionError:
            writer.close()
            return
        line = (first + rest).decode("utf-8", errors="replace").rstrip("\n")
        await self._run_session(_LineTransport(reader, writer, first=line))

    async def _handle_http(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        raw = b"G"
        while b"\r\n\r\n" not in raw:
            chunk = await reader.read(4096)
            if not chunk:
                writer.close()
                return
            raw += chunk
        method, path, headers = ws.parse_http_request(raw)
        if headers.get("upgrade", "").lower() == "websocket":
            writer.write(ws.handshake_response(headers))
            await self._run_session(_WsTransport(reader, writer))
            return
        await self._serve_static(method, path, writer)

    async def _serve_static(self, method: str, path: str, writer: asyncio.StreamWriter) -> None:
        body = b"not found"
        status = "404 Not Found"
        ctype = "text/plain"
        if method == "GET" and self.cfg.static_dir:
            rel = path.split("?", 1)[0].lstrip("/") or "index.html"
            root = Path(self.cfg.static_dir).resolve()
            target = (root / rel).resolve()
            if root in target.parents or target == root:
                if target.is_file():
                    body = target.read_bytes()
                    status = "200 OK"
                    ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        writer.write(
            (
                f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                f"Content-Length: {len(body)}\r\nCache-Control: no-store\r\n"
                "Connection: close\r\n\r\n"
            ).encode("ascii")
            + body
        )
        try:
            await writer.drain()
        except (ConnectionError, OSError):
            pass
        writer.close()

    async def _run_session(self, transport) -> None:
        line = await transport.recv()
        if line is None:
            await transport.close()
            return
        try:
            doc = json.loads(line)
        except json.JSONDecodeError:
            transport.send(_error_line("protocol", "first message must be a join document"))
            await transport.close()
            return
        if doc.get("v") != PROTOCOL_VERSION:
            transport.send(_error_line("version", f"server speaks {PROTOCOL_VERSION}"))
            await transport.close()
            return
        if doc.get("type") != "join":
            transport.send(_error_line("protocol", "expected a join message"))
            await transport.close()
            return
        if len(self.sessions) >= self.cfg.max_players:
            transport.send(_error_line("full", "server is full"))
            await transport.close()
            return

        player_id = f"p{self._next_player}"
        self._next_player += 1
        session = _PlayerSession(player_id, transport)
        self.sessions[player_id] = session
        self._pending_joins.append((player_id, session))
        session.send(
            json.dumps(
                {
                    "v": PROTOCOL_VERSION,
                    "type": "joined",
                    "player_id": player_id,
                    "tick_rate": self.cfg.tick_rate,
                    "tick": self.state.tick,
                    "motion": self.cfg.motion.to_wire(),
                    "view": self.cfg.view.to_wire(),
                },
                separators=(",", ":"),
            )[:-1]
            + ',"map":'
            + self._map_doc_json
            + "}"
        )
        try:
            while True:
                line = await transport.recv()
                if line is None:
                    break
                try:
                    doc = json.loads(line)
                    kind = doc.get("type")
                    if kind == "action":
                        session.latest_action = Action.from_wire(doc)
                    elif kind == "bye":
                        break
                    else:
                        session.send(_error_line("protocol", f"unexpected message type {kind!r}"))
                        break
                except (ValueError, KeyError, TypeError) as exc:
                    session.send(_error_line("protocol", f"bad message: {exc}"))
                    break
        finally:
            session.connected = False
            self.sessions.pop(player_id, None)
            self._pending_leaves.append(player_id)
            await transport.close()

    # -- tick loop ------------------------------------------------------------

    async def _tick_loop(self) -> None:
        loop = asyncio.get_running_loop()
        period = 1.0 / self.cfg.tick_rate
        next_start = loop.time()
        while True:
            deadline = next_start + period * self.cfg.action_deadline
            await asyncio.sleep(max(0.0, deadline - loop.time()))
            t0 = loop.time()
            self._advance_once()
            self.tick_durations.append(loop.time() - t0)
            next_start += period
            await asyncio.sleep(max(0.0, next_start - loop.time()))

    def _advance_once(self) -> None:
        state = self.state
        leaves: list[str] = []
        for pid in self._pending_leaves:
            if pid in state.players:
                state = remove_player(state, pid)
                leaves.append(pid)
        self._pending_leaves.clear()

        joins: list[str] = []
        for pid, session in self._pending_joins:
            if not session.connected:
                continue
            try:
                state = add_player(state, pid, self.cfg.motion.collision_radius)
                joins.append(pid)
            except WorldError as exc:
                session.send(_error_line("spawn", str(exc)))
                session.connected = False
        self._pending_joins.clear()

        actions: dict[str, Action] = {}
        for pid, session in self.sessions.items():
            if pid in state.players and session.latest_action is not None:
                actions[pid] = session.latest_action
                session.latest_action = None

        pre_tick = state.tick
        state, events = advance_world(state, actions, self.cfg.motion)
        self.state = state

        if self._recorder is not None:
            self._recorder.tick(pre_tick, actions, joins=joins, leaves=leaves)
            self._recorder.maybe_checkpoint(state)

        snapshot_hash = canonical_hash(state)
        events_json = json.dumps(
            [e.to_wire() for e in events]
            + [{"event": "joined", "player": pid} for pid in joins]
            + [{"event": "left", "player": pid} for pid in leaves],
            separators=(",", ":"),
        )
        for pid, session in list(self.sessions.items()):
            player = state.players.get(pid)
            if player is None:
                continue
            session.send(self._tick_update_line(state, pid, snapshot_hash, events_json))

    def _tick_update_line(
        self, state: WorldState, pid: str, snapshot_hash: str, events_json: str
    ) -> str:
        player = state.players[pid]
        pose_json = json.dumps(
            {"x": player.pose.x, "y": player.pose.y, "theta": player.pose.theta},
            separators=(",", ":"),
        )
        if player.active:
            readout, sprites = viewpoint_readout(state, pid, self.cfg.view)
            disparity = ",".join("%.6f" % d for d in readout.disparities)
            sprites_json = json.dumps([s.to_wire() for s in sprites], separators=(",", ":"))
            status = '"active"'
            respawn = "null"
            frame_part = ""
            if self.cfg.render_mode == "frames":
                frame = render_frame(readout, sprites, self.cfg.view.width, self.cfg.view.height)
                frame_b64 = base64.b64encode(frame.to_ppm()).decode("ascii")
                frame_part = f',"frame_ppm_b64":"{frame_b64}"'
        else:
            disparity = ""
            sprites_json = "[]"
            status = '"dead"'
            respawn = str(player.respawn_tick)
            frame_part = ""
        return (
            f'{{"v":"{PROTOCOL_VERSION}","type":"tick","tick":{state.tick},'
            f'"snapshot_hash":"{snapshot_hash}","pose":{pose_json},'
            f'"status":{status},"respawn_tick":{respawn},'
            f'"disparity":[{disparity}],"sprites":{sprites_json},'
            f'"events":{events_json}{frame_part}}}'
        )


async def run_server(cfg: SessionConfig) -> None:
    """Serve until stopped; SIGINT/SIGTERM stop cleanly so the replay log
    gets its trailer."""
    import signal

    server = GameServer(cfg)
    await server.start()
    loop = asyncio.get_running_loop()
    stop_requested = asyncio.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop_requested.set)
        except NotImplementedError:
            pass
    waiter = loop.create_task(stop_requested.wait())
    stopped = loop.create_task(server.serve_until_stopped())
    try:
        await asyncio.wait({waiter, stopped}, return_when=asyncio.FIRST_COMPLETED)
    finally:
        waiter.cancel()
        stopped.cancel()
        if not server._stopped.is_set():
            await server.stop()


class ServerThread:
    """Runs a GameServer on its own event loop thread (tests, tooling)."""

    def __init__(self, cfg: SessionConfig):
        self.cfg = cfg
        self.server: GameServer | None = None
        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._started = threading.Event()
        self.final_state: WorldState | None = None

    def _run(self) -> None:
        asyncio.set_event_loop(self._loop)
        self.server = GameServer(self.cfg)
        self._loop.run_until_complete(self.server.start())
        self._started.set()
        self._loop.run_forever()
        self._loop.close()

    def start(self) -> "ServerThread":
        self._thread.start()
        if not self._started.wait(timeout=10):
            raise RuntimeError("server failed to start")
        return self

    @property
    def port(self) -> int:
        return self.server.port

    def stop(self) -> WorldState:
        async def _shutdown():
            await self.server.stop()
            self._loop.stop()

        asyncio.run_coroutine_threadsafe(_shutdown(), self._loop)
        self._thread.join(timeout=10)
        self.final_state = self.server.state
        return self.final_state
