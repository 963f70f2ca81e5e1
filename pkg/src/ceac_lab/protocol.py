"""Wire protocol of the live session service.

Every message is one JSON object per line (newline-terminated UTF-8
text).  The same line format rides on both transports: raw TCP and the
WebSocket bridge (one line per text frame).  See docs/formats.md for
the message catalogue.

Client -> server:
    {"type": "hello", ...session options}
    {"type": "input", "t": <s>, "phi": <deg>}
    {"type": "end"}

Server -> client:
    {"type": "welcome", ...effective config}
    {"type": "frame", ...SessionFrame}
    {"type": "paused"} / {"type": "resumed"}
    {"type": "metrics", ...MetricReport}
    {"type": "ended", "log_path": ...}
    {"type": "error", "message": ...}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

__all__ = ["SessionFrame", "encode_message", "parse_message", "frame_to_message", "frame_from_message"]


@dataclass(frozen=True)
class SessionFrame:
    """One streamed simulation sample (the live mirror of a log row)."""

    t: float
    phi: float
    phi_ref: float
    eps: float
    theta: float
    beta: float
    pen_y: float
    pen_z: float
    in_contact: bool
    motor_active: bool
    frozen: bool
    target_index: int
    task_started: bool
    task_done: bool
    in_tolerance: bool


def encode_message(payload: dict) -> bytes:
    """One protocol line; floats keep full round-trip precision."""
    return (json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n").encode()


def parse_message(line: bytes | str) -> dict:
    """Parse one protocol line.

    Raises:
        ValueError: not valid JSON, or not a JSON object with a type.
    """
    if isinstance(line, bytes):
        line = line.decode("utf-8", errors="strict")
    line = line.strip()
    if not line:
        raise ValueError("empty message")
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed message: {exc}") from exc
    if not isinstance(payload, dict) or "type" not in payload:
        raise ValueError("message must be a JSON object with a 'type' field")
    return payload


def frame_to_message(frame: SessionFrame) -> dict:
    d = asdict(frame)
    d["type"] = "frame"
    return d


def frame_from_message(payload: dict) -> SessionFrame:
    if payload.get("type") != "frame":
        raise ValueError(f"not a frame message: {payload.get('type')!r}")
    missing = [k for k in SessionFrame.__dataclass_fields__ if k not in payload]
    if missing:
        raise ValueError(f"frame message missing fields: {missing}")
    fields = {k: payload[k] for k in SessionFrame.__dataclass_fields__}
    for name in ("t", "phi", "phi_ref", "eps", "theta", "beta", "pen_y", "pen_z"):
        value = float(fields[name])
        if not math.isfinite(value):
            raise ValueError(f"non-finite {name} in frame")
        fields[name] = value
    for name in ("in_contact", "motor_active", "frozen", "task_started", "task_done", "in_tolerance"):
        fields[name] = bool(fields[name])
    fields["target_index"] = int(fields["target_index"])
    return SessionFrame(**fields)
