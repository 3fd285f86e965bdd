"""Scripted stand-ins for a cognitive architecture, driving the ear over the wire vocabulary."""

import logging
from typing import Any, Dict, List, Optional, Tuple, Union

from ..errors import ScenarioError
from ..protocol.messages import AckMessage, CommandMessage, EventMessage
from ..scene import wrap_degrees

logger = logging.getLogger(__name__)

ROLES = ("name_listener", "vigilance_operator", "head_turner")


class MockAgent:
    """Base agent: a client id, a seq counter, and a queue of commands waiting to go out."""

    role = "agent"

    def __init__(self, params: Optional[Dict[str, Any]] = None, client_id: Optional[str] = None):
        self.params = dict(params or {})
        self.client_id = client_id or f"agent:{self.role}"
        self._seq = 0
        self._pending: List[Tuple[float, str, Dict[str, Any]]] = []
        self.acks: List[AckMessage] = []
        self.events: List[EventMessage] = []
        self.now = 0.0

    def send(self, cmd: str, args: Optional[Dict[str, Any]] = None, at: Optional[float] = None) -> None:
        self._pending.append((self.now if at is None else at, cmd, dict(args or {})))

    def start(self) -> None:
        """Queue the role's opening commands."""

    def receive(self, message: Union[AckMessage, EventMessage]) -> None:
        if isinstance(message, AckMessage):
            self.acks.append(message)
            return
        self.events.append(message)
        self.on_event(message)

    def on_event(self, event: EventMessage) -> None:
        pass

    def poll(self, now: float) -> List[CommandMessage]:
        """Commands due at ``now``, numbered in this agent's seq space."""
        self.now = now
        due = [p for p in self._pending if p[0] <= now + 1e-9]
        self._pending = [p for p in self._pending if p[0] > now + 1e-9]
        out = []
        for _, cmd, args in due:
            self._seq += 1
            out.append(CommandMessage(seq=self._seq, cmd=cmd, args=args))
        return out


class NameListener(MockAgent):
    """Listens to one speaker, answers to its name, then goes back.

    params: ``name`` (permanent word), ``words`` (short-term words),
    ``speaker`` (speaker id to focus first), ``dwell_s`` (time on the caller
    before refocusing).
    """

    role = "name_listener"

    def __init__(self, params=None, client_id=None):
        super().__init__(params, client_id)
        self.name = self.params.get("name", "HAL")
        self.speaker = self.params.get("speaker")
        self.dwell_s = float(self.params.get("dwell_s", 1.0))
        self.focused: Optional[str] = None
        self.switched = False

    def start(self) -> None:
        self.send("SUBSCRIBE")
        self.send("VIGILANCE", {"pattern": self.name, "permanent": True})
        for w in self.params.get("words", []):
            self.send("LISTEN_PRIMARY", {"pattern": w})

    def on_event(self, event: EventMessage) -> None:
        if event.kind == "STREAM_ENDED" and event.stream_id == self.focused:
            # the speaker went quiet; pick them up again on their next stream
            self.focused = None
            return
        heard = event.heard
        if heard is None:
            return
        if event.kind == "SOUND" and self.focused is None and heard.speech is not None:
            if self.speaker is None or heard.speech.speaker_id == self.speaker:
                self.focused = heard.stream_id
                self.send("FOCUS", {"stream_id": heard.stream_id})
        elif event.kind == "INTERRUPT" and event.reason == "name" and not self.switched:
            if heard.stream_id == self.focused:
                return
            self.switched = True
            self.send("FOCUS", {"stream_id": heard.stream_id})
            self.send("REFOCUS", at=self.now + self.dwell_s)


class VigilanceOperator(MockAgent):
    """Loads one long-term target and waits. params: ``pattern``, ``permanent``, ``primary``, ``secondary``."""

    role = "vigilance_operator"

    def start(self) -> None:
        if "pattern" not in self.params:
            raise ScenarioError("vigilance_operator needs a pattern")
        self.send("VIGILANCE", {"pattern": self.params["pattern"], "permanent": bool(self.params.get("permanent", False))})
        for p in self.params.get("primary", []):
            self.send("LISTEN_PRIMARY", {"pattern": p})
        for p in self.params.get("secondary", []):
            self.send("LISTEN_SECONDARY", {"pattern": p})


class HeadTurner(MockAgent):
    """Subscribes, then turns the head toward the first sound it hears.

    params: ``category`` (only turn for this category prefix), ``mode``
    (absolute or relative).
    """

    role = "head_turner"

    def __init__(self, params=None, client_id=None):
        super().__init__(params, client_id)
        self.heading = 0.0
        self.turned = False

    def start(self) -> None:
        self.send("SUBSCRIBE")

    def on_event(self, event: EventMessage) -> None:
        if event.kind == "HEAD_DONE" and event.head is not None:
            self.heading = event.head.heading
            return
        if event.kind != "SOUND" or self.turned or event.heard is None:
            return
        prefix = self.params.get("category")
        cid = event.heard.category.id
        if prefix and not (cid == prefix or cid.startswith(prefix + ".")):
            return
        self.turned = True
        if self.params.get("mode", "absolute") == "relative":
            self.send("TURN_HEAD", {"mode": "relative", "deg": round(event.heard.azimuth, 4)})
        else:
            target = wrap_degrees(self.heading + event.heard.azimuth)
            self.send("TURN_HEAD", {"mode": "absolute", "deg": round(target, 4)})


_ROLE_CLASSES = {
    "name_listener": NameListener,
    "vigilance_operator": VigilanceOperator,
    "head_turner": HeadTurner,
}


def mock_agent(role: str, params: Optional[Dict[str, Any]] = None, client_id: Optional[str] = None) -> MockAgent:
    """Build the agent for ``role``."""
    cls = _ROLE_CLASSES.get(role)
    if cls is None:
        raise ScenarioError(f"unknown agent role {role!r}; expected one of {', '.join(ROLES)}")
    return cls(params, client_id)
