"""Append-only run log: events, acks and a run summary, with JSON-lines persistence."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel

from .protocol.messages import AckMessage, EventMessage

logger = logging.getLogger(__name__)

EVENTS_FILE = "events.jsonl"
ACKS_FILE = "acks.jsonl"
RUN_FILE = "run.json"


class AckRecord(BaseModel):
    """One handled command: who sent it, what it was, and the ack it got."""

    client: str
    cmd: Optional[str] = None
    ack: AckMessage
    # id of the last event logged before this ack
    after_event: int = 0


class EventLog:
    """In-memory run log with persistence support."""

    def __init__(self):
        self.events: List[EventMessage] = []
        self.acks: List[AckRecord] = []
        self.run: Dict[str, Any] = {}

    def add_event(self, event: EventMessage) -> None:
        self.events.append(event)

    def add_ack(self, client: str, cmd: Optional[str], ack: AckMessage) -> None:
        after = self.events[-1].event_id if self.events else 0
        self.acks.append(AckRecord(client=client, cmd=cmd, ack=ack, after_event=after))

    def since(self, event_id: int, limit: int = 500) -> List[EventMessage]:
        """Events with id greater than ``event_id`` (event ids start at 1)."""
        return [e for e in self.events if e.event_id > event_id][:limit]

    def by_kind(self, *kinds: str) -> List[EventMessage]:
        return [e for e in self.events if e.kind in kinds]

    def save(self, directory: str) -> Path:
        """Write events.jsonl, acks.jsonl and run.json under ``directory``."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / EVENTS_FILE, "w", encoding="utf-8", newline="\n") as f:
            for e in self.events:
                f.write(e.model_dump_json(exclude_none=True) + "\n")
        with open(out / ACKS_FILE, "w", encoding="utf-8", newline="\n") as f:
            for a in self.acks:
                f.write(a.model_dump_json(exclude_none=True) + "\n")
        with open(out / RUN_FILE, "w", encoding="utf-8") as f:
            json.dump(self.run, f, ensure_ascii=False, indent=2, sort_keys=True)
        logger.info("[EventLog] %d events, %d acks written to %s", len(self.events), len(self.acks), out)
        return out

    @classmethod
    def load(cls, directory: str) -> "EventLog":
        """Load a run directory written by ``save``. Missing files load as empty."""
        log = cls()
        src = Path(directory)
        if (src / EVENTS_FILE).exists():
            with open(src / EVENTS_FILE, "r", encoding="utf-8") as f:
                log.events = [EventMessage.model_validate_json(line) for line in f if line.strip()]
        if (src / ACKS_FILE).exists():
            with open(src / ACKS_FILE, "r", encoding="utf-8") as f:
                log.acks = [AckRecord.model_validate_json(line) for line in f if line.strip()]
        if (src / RUN_FILE).exists():
            with open(src / RUN_FILE, "r", encoding="utf-8") as f:
                log.run = json.load(f)
        return log


def ack_event_pairs(log: EventLog) -> List[Tuple[AckRecord, EventMessage]]:
    """(load ack, FOUND event) pairs for every FOUND whose entry was loaded by a logged command."""
    loaded: Dict[str, AckRecord] = {}
    for a in log.acks:
        payload = a.ack.payload
        if a.ack.status == "ok" and isinstance(payload, dict) and isinstance(payload.get("entry_id"), str):
            loaded.setdefault(payload["entry_id"], a)
    return [(loaded[e.matched_entry], e) for e in log.events if e.kind == "FOUND" and e.matched_entry in loaded]
