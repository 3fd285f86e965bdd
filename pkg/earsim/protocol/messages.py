"""Wire vocabulary: commands, acks and events, one JSON object per line."""

import json
from typing import Any, Dict, Literal, Optional, Union, get_args

from pydantic import BaseModel, ConfigDict, ValidationError

from ..errors import BadRequestError
from ..perception import HeardObject

CommandName = Literal[
    "CURRENT_SOUND",
    "SUBSCRIBE",
    "UNSUBSCRIBE",
    "LISTEN_PRIMARY",
    "LISTEN_SECONDARY",
    "TAKE_INTERRUPTS",
    "IGNORE_INTERRUPTS",
    "VIGILANCE",
    "LIST_ADD",
    "LIST_REMOVE",
    "LIST_QUERY",
    "TURN_HEAD",
    "FOCUS",
    "REFOCUS",
]
EventKind = Literal["SOUND", "FOUND", "INTERRUPT", "ALARM", "HEAD_DONE", "HEAD_CANCELLED", "STREAM_ENDED"]

COMMANDS = get_args(CommandName)
EVENT_KINDS = get_args(EventKind)


class _Wire(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CommandMessage(_Wire):
    seq: int
    cmd: CommandName
    args: Dict[str, Any] = {}


class AckMessage(_Wire):
    seq: Optional[int] = None
    status: Literal["ok", "error"] = "ok"
    error_code: Optional[str] = None
    message: Optional[str] = None
    payload: Optional[Any] = None
    t: float = 0.0


class HeadDetail(_Wire):
    heading: float
    target: float
    cause_seq: Optional[int] = None


class EventMessage(_Wire):
    event_id: int = 0
    kind: EventKind
    t: float
    heard: Optional[HeardObject] = None
    matched_entry: Optional[str] = None
    list_kind: Optional[str] = None
    # INTERRUPT cause: name | loud | allowed
    reason: Optional[str] = None
    stream_id: Optional[str] = None
    head: Optional[HeadDetail] = None


Message = Union[CommandMessage, AckMessage, EventMessage]


def encode(message: Message) -> str:
    """One newline-terminated JSON line; absent optional fields are omitted."""
    return message.model_dump_json(exclude_none=True) + "\n"


def decode(line: Union[str, bytes]) -> Message:
    """Parse one line. Anything that is not a valid message raises BadRequestError."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise BadRequestError(f"line is not UTF-8: {e.reason}")
    text = line.strip()
    if not text:
        raise BadRequestError("empty line")
    try:
        data = json.loads(text)
    except (ValueError, RecursionError) as e:
        raise BadRequestError(f"malformed JSON: {e}")
    if not isinstance(data, dict):
        raise BadRequestError("message must be a JSON object")
    try:
        if "cmd" in data:
            cmd = data.get("cmd")
            if not isinstance(cmd, str) or cmd not in COMMANDS:
                raise BadRequestError(f"unknown cmd {cmd!r}")
            if "args" in data and not isinstance(data["args"], dict):
                raise BadRequestError("args must be an object")
            return CommandMessage.model_validate(data)
        if "status" in data:
            return AckMessage.model_validate(data)
        if "kind" in data:
            return EventMessage.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise BadRequestError(f"{where}: {first.get('msg')}")
    raise BadRequestError("message has none of cmd/status/kind")


def peek_seq(line: Union[str, bytes]) -> Optional[int]:
    """Best-effort seq of an undecodable command line, for the error ack."""
    try:
        data = json.loads(line)
    except (ValueError, RecursionError, TypeError):
        return None
    seq = data.get("seq") if isinstance(data, dict) else None
    return seq if isinstance(seq, int) and not isinstance(seq, bool) else None
