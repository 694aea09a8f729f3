"""Session wire protocol: tagged JSON text frames over WebSocket (proto v1).

Client to server: hello, input. Server to client: welcome, frame,
choice_result, end. Each WebSocket text message carries exactly one JSON
document; the transport frames delimit message boundaries. All units are
embedded in the field names.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ProtocolError

PROTO_VERSION = 1


@dataclass(frozen=True)
class Hello:
    role: str            # "p1", "p2" or "view"
    session: str
    proto_version: int = PROTO_VERSION


@dataclass(frozen=True)
class Input:
    seq: int
    t_client_ms: float
    handle_x_mm: float


@dataclass(frozen=True)
class Welcome:
    session: str
    script_preview: dict
    proto_version: int = PROTO_VERSION


@dataclass(frozen=True)
class FrameMsg:
    t_ms: float
    cursor_x_mm: float
    own_x_mm: float
    color: str           # "green" / "orange" / "red"
    phase: str           # "body" / "choice_pre" / "choice_post" / "merge"
    highlight: str | None            # "left" / "right" / None
    path_window: tuple = ()          # ((t_offset_ms, left_mm, right_mm), ...)

    def __post_init__(self):
        norm = tuple(
            (float(t), float(l), float(r)) for t, l, r in self.path_window)
        object.__setattr__(self, "path_window", norm)


@dataclass(frozen=True)
class ChoiceResult:
    index: int
    direction: str | None
    performance: float


@dataclass(frozen=True)
class End:
    report_summary: dict


_TYPES = {
    "hello": Hello,
    "input": Input,
    "welcome": Welcome,
    "frame": FrameMsg,
    "choice_result": ChoiceResult,
    "end": End,
}
_TAGS = {v: k for k, v in _TYPES.items()}

SessionMessage = Hello | Input | Welcome | FrameMsg | ChoiceResult | End


def encode_message(msg) -> str:
    """One message to one JSON text frame."""
    tag = _TAGS.get(type(msg))
    if tag is None:
        raise ProtocolError(f"not a session message: {type(msg).__name__}")
    d = {"type": tag}
    for name in msg.__dataclass_fields__:
        value = getattr(msg, name)
        if isinstance(value, tuple):
            value = [list(p) for p in value]
        d[name] = value
    return json.dumps(d, sort_keys=True)


_FIELD_CHECKS = {
    "hello": (("role", str), ("session", str), ("proto_version", int)),
    "input": (("seq", int), ("t_client_ms", (int, float)), ("handle_x_mm", (int, float))),
    "welcome": (("session", str), ("script_preview", dict), ("proto_version", int)),
    "frame": (("t_ms", (int, float)), ("cursor_x_mm", (int, float)),
              ("own_x_mm", (int, float)), ("color", str), ("phase", str),
              ("highlight", (str, type(None))), ("path_window", list)),
    "choice_result": (("index", int), ("direction", (str, type(None))),
                      ("performance", (int, float))),
    "end": (("report_summary", dict),),
}


def decode_message(text: str):
    """One JSON text frame back to a message; errors name the offending field."""
    try:
        d = json.loads(text)
    except (ValueError, TypeError) as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ProtocolError("message must be a JSON object")
    tag = d.get("type")
    if tag not in _TYPES:
        raise ProtocolError(f"unknown message type: {tag!r}")
    checks = _FIELD_CHECKS[tag]
    kwargs = {}
    for name, types in checks:
        if name not in d:
            raise ProtocolError(f"{tag}: missing field {name!r}")
        value = d[name]
        if isinstance(value, bool) or not isinstance(value, types):
            raise ProtocolError(f"{tag}: field {name!r} has wrong type")
        kwargs[name] = value
    extra = set(d) - {"type"} - {name for name, _ in checks}
    if extra:
        raise ProtocolError(f"{tag}: unknown fields {sorted(extra)}")
    if tag == "frame":
        window = []
        for item in kwargs["path_window"]:
            if (not isinstance(item, list) or len(item) != 3
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                               for v in item)):
                raise ProtocolError("frame: field 'path_window' has wrong shape")
            window.append(tuple(float(v) for v in item))
        kwargs["path_window"] = tuple(window)
    cls = _TYPES[tag]
    try:
        return cls(**kwargs)
    except TypeError as exc:  # pragma: no cover - guarded by checks above
        raise ProtocolError(f"{tag}: {exc}") from exc
