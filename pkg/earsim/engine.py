"""The ear engine: one virtual timeline that owns the scene, the tracker and attention.

Commands arrive through a serialized inbox and are handled at the start of a
window (acks stamped with that window's start time). Events wait in a time
ordered outbox and are released once the timeline has passed their timestamp,
so released event times never decrease.
"""

import heapq
import itertools
import json
import logging
import time
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .attention import (
    AttentionState,
    advance_head,
    alarm_pipeline,
    decay_step,
    evaluate_frame,
    prune_dead,
    seed_known_types,
    snapshot,
)
from .config import EngineConfig
from .errors import BadRequestError, BadSeqError
from .event_log import EventLog
from .graph import PipelineDeps, build_window_graph, word_targets_of
from .ontology import OntologyRegistry, load_builtin_ontology
from .perception import StreamTracker
from .protocol.messages import AckMessage, CommandMessage, EventMessage, decode, peek_seq
from .protocol.service import CommandService
from .scene import AuditoryScene, resolve_templates, source_index

logger = logging.getLogger(__name__)

Sink = Callable[[Union[AckMessage, EventMessage]], None]
Inbound = Union[str, bytes, CommandMessage, Dict[str, Any]]


class ClientSession:
    """Per-connection seq space and delivery sink."""

    def __init__(self, client_id: str, sink: Optional[Sink] = None):
        self.client_id = client_id
        self.sink = sink
        self.last_seq: Optional[int] = None

    def deliver(self, message: Union[AckMessage, EventMessage]) -> None:
        if self.sink is not None:
            self.sink(message)


class EarEngine:
    """Steps a scene window by window and talks to any number of clients."""

    def __init__(
        self,
        scene: AuditoryScene,
        config: Optional[EngineConfig] = None,
        registry: Optional[OntologyRegistry] = None,
    ):
        self.config = config or EngineConfig()
        self.scene = scene
        self.registry = registry or load_builtin_ontology(self.config.ear, self.config.ontology)
        self.registry.freeze()
        self.hop = scene.frame_hop_s
        self.frame_index = 0
        self.rng = np.random.default_rng(self.config.seed)
        self.tracker = StreamTracker(self.config.segregation, self.config.localization, self.hop)
        self.attention = AttentionState()
        seed_known_types(self.attention, self.registry)
        self.service = CommandService(self)
        self.log = EventLog()
        self.clients: Dict[str, ClientSession] = {}
        self.counters: Dict[str, int] = {"windows": 0, "commands": 0, "silent_windows": 0}

        self._inbox: List[Tuple[str, Inbound]] = []
        self._outbox: List[Tuple[float, int, EventMessage]] = []
        self._order = itertools.count()
        self._next_event = 1
        self._finished = False

        templates = resolve_templates(scene, self.config.ear, self.registry)
        deps = PipelineDeps(scene, self.config, self.registry, templates, source_index(scene), self.tracker, self.rng)
        self._graph = build_window_graph(deps)
        logger.info(
            "[Engine] scene %.1fs, %d sources, %d frames, seed %d",
            scene.duration_s,
            len(scene.sources),
            scene.frame_count,
            self.config.seed,
        )

    # --- clock ---

    @property
    def now(self) -> float:
        return round(self.frame_index * self.hop, 9)

    @property
    def finished(self) -> bool:
        return self._finished

    @property
    def window_s(self) -> float:
        return self.config.window_frames * self.hop

    # --- clients ---

    def connect(self, client_id: str, sink: Optional[Sink] = None) -> ClientSession:
        session = self.clients.get(client_id)
        if session is None:
            session = ClientSession(client_id, sink)
            self.clients[client_id] = session
        elif sink is not None:
            session.sink = sink
        return session

    def disconnect(self, client_id: str) -> None:
        self.clients.pop(client_id, None)
        self.attention.subscribers.discard(client_id)
        self._inbox = [(c, m) for c, m in self._inbox if c != client_id]
        logger.info("[Engine] client %s disconnected", client_id)

    def submit(self, client_id: str, message: Inbound) -> None:
        """Queue a command line (or decoded message) for the next window."""
        self.connect(client_id)
        self._inbox.append((client_id, message))

    def schedule(self, events: List[EventMessage]) -> None:
        for e in events:
            heapq.heappush(self._outbox, (e.t, next(self._order), e))

    # --- command handling ---

    def _parse(self, message: Inbound) -> CommandMessage:
        if isinstance(message, CommandMessage):
            return message
        if isinstance(message, dict):
            message = json.dumps(message)
        decoded = decode(message)
        if not isinstance(decoded, CommandMessage):
            raise BadRequestError("expected a command")
        return decoded

    def handle(self, client_id: str, message: Inbound) -> AckMessage:
        """Handle one command now and return its ack (also logged and delivered)."""
        session = self.connect(client_id)
        now = self.now
        cmd_name = None
        try:
            command = self._parse(message)
            cmd_name = command.cmd
            if session.last_seq is not None and command.seq <= session.last_seq:
                raise BadSeqError(f"seq {command.seq} after {session.last_seq}")
            session.last_seq = command.seq
            response = self.service.call(command.cmd, command.args, client=client_id, seq=command.seq)
            if response.success:
                ack = AckMessage(seq=command.seq, status="ok", payload=response.result, t=now)
            else:
                ack = AckMessage(
                    seq=command.seq, status="error", error_code=response.error_code, message=response.error, t=now
                )
        except (BadRequestError, BadSeqError) as e:
            seq = message.seq if isinstance(message, CommandMessage) else None
            if seq is None and isinstance(message, (str, bytes)):
                seq = peek_seq(message)
            elif seq is None and isinstance(message, dict):
                raw = message.get("seq")
                seq = raw if isinstance(raw, int) and not isinstance(raw, bool) else None
            ack = AckMessage(seq=seq, status="error", error_code=e.code, message=e.message, t=now)
        self.counters["commands"] += 1
        self.log.add_ack(client_id, cmd_name, ack)
        session.deliver(ack)
        return ack

    def drain_inbox(self) -> None:
        inbox, self._inbox = self._inbox, []
        for client_id, message in inbox:
            self.handle(client_id, message)

    # --- stepping ---

    def _release(self, horizon: float) -> List[EventMessage]:
        released = []
        while self._outbox and self._outbox[0][0] <= horizon + 1e-9:
            _, _, event = heapq.heappop(self._outbox)
            event = event.model_copy(update={"event_id": self._next_event})
            self._next_event += 1
            released.append(event)
            self.log.add_event(event)
            self._fan_out(event)
        return released

    def _fan_out(self, event: EventMessage) -> None:
        if event.kind == "SOUND":
            targets = [self.clients[c] for c in sorted(self.attention.subscribers) if c in self.clients]
        else:
            targets = list(self.clients.values())
        for session in targets:
            session.deliver(event)

    def step(self) -> List[EventMessage]:
        """Handle queued commands, process one window and release due events."""
        if self._finished:
            return []
        now = self.now
        cfg = self.config
        self.drain_inbox()
        decay_step(self.attention, now, cfg.attention, cfg.super_ear)

        times, headings = [], []
        for i in range(cfg.window_frames):
            t = round(now + i * self.hop, 9)
            self.schedule(advance_head(self.attention, t, cfg.attention))
            times.append(t)
            headings.append(self.attention.head_heading)
        end = times[-1]

        result = self._graph.invoke(
            {
                "times": times,
                "headings": headings,
                "word_targets": word_targets_of(self.attention.entries.values()),
                "focused_stream": self.attention.focused,
            }
        )
        if not result["segregation"].clusters:
            self.counters["silent_windows"] += 1

        events, alarm_candidates, _ = evaluate_frame(
            self.attention, result["candidates"], end, self.rng, cfg.attention, cfg.super_ear
        )
        for heard in alarm_pipeline(self.attention, alarm_candidates, end, cfg.alarms):
            events.append(EventMessage(kind="ALARM", t=end, heard=heard))
        ended = [t.stream_id for t in result["update"].ended]
        events.extend(self._stream_ended(ended, end))
        self.schedule(events)

        self.counters["windows"] += 1
        self.frame_index += cfg.window_frames
        if self.frame_index >= self.scene.frame_count:
            return self._release(end) + self._finish(end)
        return self._release(end)

    def _stream_ended(self, stream_ids: List[str], t: float) -> List[EventMessage]:
        if stream_ids:
            prune_dead(self.attention, stream_ids, self.tracker.alive)
        return [EventMessage(kind="STREAM_ENDED", t=t, stream_id=sid) for sid in stream_ids]

    def _finish(self, end: float) -> List[EventMessage]:
        """Close every live stream and flush the outbox."""
        self.drain_inbox()
        closed = [t.stream_id for t in self.tracker.close_all()]
        self.schedule(self._stream_ended(closed, end))
        self._finished = True
        released = self._release(float("inf"))
        logger.info("[Engine] finished at %.2fs: %d events, %d acks", end, len(self.log.events), len(self.log.acks))
        return released

    def run(
        self,
        on_window: Optional[Callable[["EarEngine", List[EventMessage]], None]] = None,
        realtime: Optional[bool] = None,
    ) -> EventLog:
        """Step to the end of the scene. ``on_window`` sees each window's released events."""
        realtime = self.config.clock_mode == "realtime" if realtime is None else realtime
        while not self._finished:
            started = time.monotonic()
            released = self.step()
            if on_window is not None:
                on_window(self, released)
            if realtime:
                time.sleep(max(self.window_s - (time.monotonic() - started), 0.0))
        return self.log

    # --- read-only views ---

    def state(self) -> Dict[str, Any]:
        view = snapshot(self.attention)
        view["streams"] = sorted(self.tracker.tracks, key=lambda s: int(s[1:]))
        view["finished"] = self._finished
        return view

    def metrics(self) -> Dict[str, Any]:
        kinds: Dict[str, int] = {}
        for e in self.log.events:
            kinds[e.kind] = kinds.get(e.kind, 0) + 1
        return {
            "t": self.now,
            **self.counters,
            "events": kinds,
            "alarms": self.attention.alarm_metrics.model_dump(),
            "clients": len(self.clients),
        }
