"""Command service - maps the wire vocabulary onto attention operations.

The socket server, the HTTP control panel and in-process callers all go through
``CommandService.call``. It runs on the engine timeline, so state mutations
are serialized by construction.
"""

import logging
import math
from typing import Any, Dict, List, Optional

from ..attention import focus, list_admin, load_target, refocus_previous, snapshot, turn_head
from ..errors import BadRequestError, EarSimError
from .base import BaseCommandService, ServiceResponse

logger = logging.getLogger(__name__)

LISTEN_LISTS = {
    "LISTEN_PRIMARY": "short_term_primary",
    "LISTEN_SECONDARY": "short_term_secondary",
    "VIGILANCE": "long_term",
}


def _pattern(args: Dict[str, Any]) -> str:
    pattern = args.get("pattern")
    if not isinstance(pattern, str) or not pattern.strip():
        raise BadRequestError("args.pattern must be a non-empty string")
    return pattern


def _patterns(args: Dict[str, Any]) -> List[str]:
    patterns = args.get("patterns", [])
    if isinstance(patterns, str):
        patterns = [patterns]
    if not isinstance(patterns, list) or not all(isinstance(p, str) and p.strip() for p in patterns):
        raise BadRequestError("args.patterns must be a list of strings")
    return patterns


def _flag(args: Dict[str, Any], name: str) -> bool:
    value = args.get(name, False)
    if not isinstance(value, bool):
        raise BadRequestError(f"args.{name} must be a boolean")
    return value


class CommandService(BaseCommandService):
    """
    Command service bound to one engine.
    ``engine`` must expose ``attention``, ``tracker``, ``registry``, ``config``,
    ``now`` and ``schedule(events)``.
    """

    def __init__(self, engine):
        super().__init__("CommandService")
        self._engine = engine

    def call(
        self,
        cmd: str,
        args: Optional[Dict[str, Any]] = None,
        client: str = "local",
        seq: Optional[int] = None,
    ) -> ServiceResponse:
        """Handle one command for ``client``; ``seq`` tags events the command causes."""
        args = args or {}
        try:
            if cmd == "CURRENT_SOUND":
                return self._current_sound()
            if cmd == "SUBSCRIBE":
                self._engine.attention.subscribers.add(client)
                return self._success({"subscribed": True})
            if cmd == "UNSUBSCRIBE":
                self._engine.attention.subscribers.discard(client)
                return self._success({"subscribed": False})
            if cmd in LISTEN_LISTS:
                return self._listen(LISTEN_LISTS[cmd], args)
            if cmd == "TAKE_INTERRUPTS":
                return self._take_interrupts(args)
            if cmd == "IGNORE_INTERRUPTS":
                return self._ignore_interrupts(args)
            if cmd in ("LIST_ADD", "LIST_REMOVE", "LIST_QUERY"):
                return self._list(cmd, args)
            if cmd == "TURN_HEAD":
                return self._turn_head(args, seq)
            if cmd == "FOCUS":
                return self._focus(args)
            if cmd == "REFOCUS":
                return self._refocus()
            return self._error(f"unknown cmd {cmd!r}", BadRequestError.code)
        except EarSimError as e:
            logger.info("[Service] %s from %s failed: %s", cmd, client, e.message)
            return self._failure(e)

    def _current_sound(self) -> ServiceResponse:
        heard = self._engine.attention.current_sound
        if heard is None:
            return self._success({})
        return self._success({"heard": heard.model_dump(mode="json", exclude_none=True)})

    def _listen(self, list_kind: str, args: Dict[str, Any]) -> ServiceResponse:
        e = self._engine
        entry_id = load_target(
            e.attention,
            _pattern(args),
            list_kind,
            _flag(args, "permanent"),
            e.now,
            e.config.attention,
            e.registry,
        )
        return self._success({"entry_id": entry_id, "list_kind": list_kind})

    def _take_interrupts(self, args: Dict[str, Any]) -> ServiceResponse:
        state = self._engine.attention
        patterns = _patterns(args)
        if not patterns:
            state.ignore_interrupts = False
        for p in patterns:
            if p not in state.interrupt_allow:
                state.interrupt_allow.append(p)
        return self._success({"ignore_interrupts": state.ignore_interrupts, "interrupt_allow": list(state.interrupt_allow)})

    def _ignore_interrupts(self, args: Dict[str, Any]) -> ServiceResponse:
        e = self._engine
        patterns = _patterns(args)
        if not patterns:
            e.attention.ignore_interrupts = True
            return self._success({"ignore_interrupts": True})
        ids = [load_target(e.attention, p, "ignored", False, e.now, e.config.attention, e.registry) for p in patterns]
        return self._success({"entry_ids": ids})

    def _list(self, cmd: str, args: Dict[str, Any]) -> ServiceResponse:
        e = self._engine
        op = {"LIST_ADD": "add", "LIST_REMOVE": "remove", "LIST_QUERY": "list"}[cmd]
        list_kind = args.get("list")
        pattern = args.get("pattern")
        if op != "list":
            pattern = _pattern(args)
        if list_kind is not None and not isinstance(list_kind, str):
            raise BadRequestError("args.list must be a string")
        result = list_admin(
            e.attention,
            op,
            list_kind,
            pattern,
            e.now,
            e.config.attention,
            e.registry,
            permanent=_flag(args, "permanent"),
        )
        return self._success(result)

    def _turn_head(self, args: Dict[str, Any], seq: Optional[int]) -> ServiceResponse:
        e = self._engine
        mode = args.get("mode", "relative")
        degrees = args.get("deg", args.get("degrees"))
        if isinstance(degrees, bool) or not isinstance(degrees, (int, float)) or not math.isfinite(degrees):
            raise BadRequestError("args.deg must be a finite number")
        payload, events = turn_head(e.attention, mode, float(degrees), e.now, e.config.attention, seq)
        e.schedule(events)
        return self._success(payload)

    def _focus(self, args: Dict[str, Any]) -> ServiceResponse:
        e = self._engine
        stream_id = args.get("stream_id")
        if not isinstance(stream_id, str):
            raise BadRequestError("args.stream_id must be a string")
        focus(e.attention, stream_id, e.tracker.alive)
        return self._success({"focused": e.attention.focused, "focus_stack": list(e.attention.focus_stack)})

    def _refocus(self) -> ServiceResponse:
        e = self._engine
        _, notice = refocus_previous(e.attention, e.tracker.alive)
        result = {"focused": e.attention.focused, "focus_stack": list(e.attention.focus_stack)}
        if notice:
            result["notice"] = notice
        return self._success(result)

    def query_state(self) -> Dict[str, Any]:
        return snapshot(self._engine.attention)
