"""Live interactive session service.

A client streams trunk-angle samples ``{"type": "input", "t": ..,
"phi": ..}``; the server advances the same fixed-step engine used by
offline trials (substeps up to each input timestamp, trunk held
between samples) and streams one frame per log row back.  Ending a
session writes a standard trial log and returns its metrics, so live
runs feed the same analysis pipeline as scripted ones.

Two transports share the line-per-message JSON protocol on one port:
raw TCP (newline-delimited) and a minimal server-side WebSocket bridge
(one line per text frame) so the browser sandbox can connect directly.
Simulation time is input-driven: a client sending in real time yields
a wall-clock-paced session, a replay client yields an accelerated but
numerically identical one, and a silent client pauses the simulation.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import os
import struct
import time
from dataclasses import replace
from pathlib import Path

from .config import TrialConfig, config_from_dict
from .control import ControlMode
from .logs import TrialLog
from .protocol import SessionFrame, encode_message, frame_to_message, parse_message
from .trial import TrialEngine, build_task, compute_report

__all__ = ["SessionEngine", "serve_session", "default_session_config", "INPUT_TIMEOUT"]

INPUT_TIMEOUT = 5.0  # s without client input before the session reports paused
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def default_session_config(mode: str = "ceac") -> TrialConfig:
    """The sandbox scene: the bundled 20 cm line task at the working stance."""
    from importlib import resources

    from .config import load_config

    mode = ControlMode(mode)
    name = "line_ccc" if mode is ControlMode.CCC else "line_ceac"
    config = load_config(resources.files("ceac_lab.data") / "configs" / f"{name}.json")
    return replace(config, max_duration=None)


class SessionEngine:
    """Client-driven wrapper around the trial engine (no I/O)."""

    def __init__(self, config: TrialConfig):
        self.config = config
        self.engine = TrialEngine(config)
        self._t0: float | None = None
        self._last_phi = self.engine.phi
        self._frames_sent = 0
        # frame for the t = 0 row the engine emits on construction
        self._pending = [self._row_frame(0)]

    def _row_frame(self, index: int) -> SessionFrame:
        row = self.engine.rows[index]
        progress = self.engine.progress
        return SessionFrame(
            t=row[0],
            phi=row[1],
            phi_ref=row[2],
            eps=row[3],
            theta=row[4],
            beta=row[5],
            pen_y=row[7],
            pen_z=row[8],
            in_contact=bool(row[9]),
            motor_active=bool(row[10]),
            frozen=bool(row[12]),
            target_index=int(row[11]),
            task_started=progress.started_at is not None,
            task_done=progress.done,
            in_tolerance=progress.in_tolerance,
        )

    def push_input(self, t: float, phi: float) -> list[SessionFrame]:
        """Advance simulation up to client time t; returns new frames."""
        if self._t0 is None:
            self._t0 = t
        sim_target = t - self._t0
        frames = list(self._pending)
        self._pending.clear()
        dt = self.engine.dt
        while self.engine.t + dt <= sim_target + 1e-12:
            rows_before = len(self.engine.rows)
            self.engine.substep(self._last_phi)
            if len(self.engine.rows) > rows_before:
                frames.append(self._row_frame(len(self.engine.rows) - 1))
        self._last_phi = phi
        return frames

    def finish(self) -> TrialLog:
        return self.engine.finalize()


class _NdjsonStream:
    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter, first_line: bytes):
        self.reader = reader
        self.writer = writer
        self._first = first_line

    async def recv(self) -> bytes | None:
        if self._first is not None:
            line, self._first = self._first, None
            return line
        line = await self.reader.readline()
        return line if line else None

    async def send(self, payload: dict) -> None:
        self.writer.write(encode_message(payload))
        await self.writer.drain()


class _WebSocketStream:
    """Minimal RFC 6455 server side: text frames, ping/pong, close."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer

    @staticmethod
    def accept_key(client_key: str) -> str:
        digest = hashlib.sha1((client_key + _WS_GUID).encode()).digest()
        return base64.b64encode(digest).decode()

    async def handshake(self, request_line: bytes) -> None:
        headers: dict[str, str] = {}
        while True:
            line = await self.reader.readline()
            if line in (b"\r\n", b"\n", b""):
                break
            name, _, value = line.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key")
        if not key:
            self.writer.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            await self.writer.drain()
            raise ConnectionError("missing Sec-WebSocket-Key")
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {self.accept_key(key)}\r\n\r\n"
        )
        self.writer.write(response.encode("latin-1"))
        await self.writer.drain()

    async def _read_frame(self) -> tuple[int, bytes] | None:
        header = await self.reader.readexactly(2)
        fin = header[0] & 0x80
        opcode = header[0] & 0x0F
        masked = header[1] & 0x80
        length = header[1] & 0x7F
        if length == 126:
            length = struct.unpack(">H", await self.reader.readexactly(2))[0]
        elif length == 127:
            length = struct.unpack(">Q", await self.reader.readexactly(8))[0]
        mask = await self.reader.readexactly(4) if masked else b"\x00" * 4
        payload = bytearray(await self.reader.readexactly(length))
        if masked:
            for i in range(length):
                payload[i] ^= mask[i % 4]
        if not fin:
            nxt = await self._read_frame()
            if nxt is None:
                return None
            _, more = nxt
            payload.extend(more)
        return opcode, bytes(payload)

    async def recv(self) -> bytes | None:
        while True:
            try:
                frame = await self._read_frame()
            except (asyncio.IncompleteReadError, ConnectionError):
                return None
            if frame is None:
                return None
            opcode, payload = frame
            if opcode == 0x8:  # close
                await self._send_raw(0x8, payload[:2])
                return None
            if opcode == 0x9:  # ping -> pong
                await self._send_raw(0xA, payload)
                continue
            if opcode in (0x1, 0x2, 0x0):
                return payload
            # ignore other control frames

    async def _send_raw(self, opcode: int, payload: bytes) -> None:
        header = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header += bytes([n])
        elif n < 1 << 16:
            header += bytes([126]) + struct.pack(">H", n)
        else:
            header += bytes([127]) + struct.pack(">Q", n)
        self.writer.write(header + payload)
        await self.writer.drain()

    async def send(self, payload: dict) -> None:
        await self._send_raw(0x1, encode_message(payload).rstrip(b"\n") + b"\n")


async def _run_session(stream, out_dir: Path, on_log=None) -> None:
    session: SessionEngine | None = None
    paused = False
    started_wall = None

    async def send_error(message: str) -> None:
        await stream.send({"type": "error", "message": message})

    while True:
        try:
            line = await asyncio.wait_for(stream.recv(), timeout=INPUT_TIMEOUT)
        except asyncio.TimeoutError:
            if session is not None and not paused:
                paused = True
                await stream.send({"type": "paused"})
            continue
        if line is None:
            break
        try:
            msg = parse_message(line)
        except ValueError as exc:
            await send_error(str(exc))
            continue

        kind = msg.get("type")
        if kind == "hello":
            try:
                if "config" in msg:
                    config = config_from_dict(msg["config"])
                else:
                    config = default_session_config(msg.get("mode", "ceac"))
                overrides = msg.get("controller", {})
                if overrides:
                    config = replace(
                        config,
                        controller=replace(
                            config.controller,
                            **{
                                k: float(overrides[k])
                                for k in ("deadzone_zeta", "cutoff_fc", "gain_lambda")
                                if k in overrides
                            },
                        ),
                    )
                session = SessionEngine(config)
                started_wall = time.monotonic()
            except (ValueError, KeyError, TypeError) as exc:
                await send_error(f"bad session config: {exc}")
                continue
            effective = session.engine.lengths
            await stream.send(
                {
                    "type": "welcome",
                    "mode": config.controller.mode.value,
                    "task": config.task.kind.value,
                    "sample_rate": config.sample_rate,
                    "stance_lean": config.stance_lean,
                    "calibration_angle": config.calibration_angle,
                    "deadzone_zeta": config.controller.deadzone_zeta,
                    "cutoff_fc": config.controller.cutoff_fc,
                    "gain_lambda": config.controller.gain_lambda,
                    "table_z": config.table_z,
                    "line_start_y": config.line_start_y,
                    "line_length": config.task.length,
                    "segment_lengths": [
                        effective.trunk_len,
                        effective.upper_arm_len,
                        effective.forearm_pen_len,
                    ],
                    "elbow_mount_offset": effective.elbow_mount_offset,
                    "hip": [0.0, 0.0],
                }
            )
        elif kind == "input":
            if session is None:
                await send_error("send hello before input")
                continue
            if paused:
                paused = False
                await stream.send({"type": "resumed"})
            try:
                t, phi = float(msg["t"]), float(msg["phi"])
            except (KeyError, TypeError, ValueError):
                await send_error("input needs numeric t and phi")
                continue
            try:
                frames = session.push_input(t, phi)
            except Exception as exc:
                await send_error(f"simulation error: {exc}")
                break
            for frame in frames:
                await stream.send(frame_to_message(frame))
        elif kind == "end":
            break
        else:
            await send_error(f"unknown message type {kind!r}")

    if session is not None and len(session.engine.rows) > 1:
        log = session.finish()
        out_dir.mkdir(parents=True, exist_ok=True)
        stamp = f"session_{log.header['config_hash']}_{int(time.time() * 1000)}"
        path = out_dir / f"{stamp}.csv"
        log.write(path)
        if on_log is not None:
            on_log(path, log)
        task = build_task(session.config.task, session.config.table_z, session.config.line_start_y)
        try:
            report = compute_report(log, task)
            payload = json.loads(report.to_json())
        except ValueError as exc:
            payload = {"error": f"metrics unavailable: {exc}"}
        try:
            await stream.send({"type": "metrics", "report": payload})
            await stream.send({"type": "ended", "log_path": str(path)})
        except (ConnectionError, BrokenPipeError):
            pass


async def _handle_connection(reader, writer, out_dir: Path, on_log=None) -> None:
    try:
        first = await reader.readline()
        if first.startswith(b"GET "):
            ws = _WebSocketStream(reader, writer)
            await ws.handshake(first)
            await _run_session(ws, out_dir, on_log)
        else:
            await _run_session(_NdjsonStream(reader, writer, first), out_dir, on_log)
    except (ConnectionError, asyncio.IncompleteReadError):
        pass
    finally:
        try:
            writer.close()
            await writer.wait_closed()
        except (ConnectionError, BrokenPipeError):
            pass


def output_dir(override: str | None = None) -> Path:
    if override:
        return Path(override)
    return Path(os.environ.get("CEAC_LAB_DATA_DIR", "ceac_lab_out"))


async def serve_session(host: str = "127.0.0.1", port: int = 7466, out: str | None = None, on_log=None):
    """Run the session server until cancelled.

    Each connection is one fully isolated session; logs land in the
    output directory (CEAC_LAB_DATA_DIR or ./ceac_lab_out).
    """
    out_path = output_dir(out)

    async def handler(reader, writer):
        await _handle_connection(reader, writer, out_path, on_log)

    server = await asyncio.start_server(handler, host, port)
    return server
