"""Post-hoc invariant checks over a run log. Each returns a CheckResult; none raise."""

from collections import defaultdict
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel

from ..event_log import AckRecord, EventLog, ack_event_pairs
from ..protocol.messages import EventMessage


class CheckResult(BaseModel):
    name: str
    ok: bool
    detail: str = ""
    evidence: List[int] = []


def rate_cap(events: Sequence[EventMessage], cap: int = 30, window_s: float = 60.0) -> CheckResult:
    """At most ``cap`` ALARM events in every trailing window (t - window_s, t]."""
    alarms = [e for e in events if e.kind == "ALARM"]
    worst, worst_at = 0, None
    for i, e in enumerate(alarms):
        n = sum(1 for a in alarms[: i + 1] if a.t > e.t - window_s)
        if n > worst:
            worst, worst_at = n, e
    ok = worst <= cap
    return CheckResult(
        name="rate_cap",
        ok=ok,
        detail=f"max {worst} alarms in a {window_s:g}s window (cap {cap})",
        evidence=[worst_at.event_id] if worst_at is not None and not ok else [],
    )


def _follows(ack: AckRecord, event: EventMessage) -> bool:
    return event.event_id > ack.after_event and event.t >= ack.ack.t


def ack_before_event(log: EventLog) -> CheckResult:
    """Caused events follow their ack: FOUND after the ack that loaded its entry, head events after the turn ack.

    Order is by stream position. An event must be logged after its ack and may
    share the ack's timestamp (a zero-length turn finishes at the instant it is
    acked) but never carry an earlier one.
    """
    bad = [e.event_id for a, e in ack_event_pairs(log) if not _follows(a, e)]
    turn_acks: Dict[int, List[AckRecord]] = defaultdict(list)
    for a in log.acks:
        if a.cmd == "TURN_HEAD" and a.ack.status == "ok" and a.ack.seq is not None:
            turn_acks[a.ack.seq].append(a)
    for e in log.events:
        if e.kind in ("HEAD_DONE", "HEAD_CANCELLED") and e.head is not None and e.head.cause_seq is not None:
            if not any(_follows(a, e) for a in turn_acks.get(e.head.cause_seq, [])):
                bad.append(e.event_id)
    return CheckResult(
        name="ack_before_event",
        ok=not bad,
        detail=f"{len(bad)} events precede their cause" if bad else "every caused event follows its ack",
        evidence=bad,
    )


def monotonic_events(events: Sequence[EventMessage]) -> CheckResult:
    """Event times never decrease and event ids strictly increase."""
    bad = [
        b.event_id
        for a, b in zip(events, events[1:])
        if b.t < a.t - 1e-9 or b.event_id <= a.event_id
    ]
    return CheckResult(name="monotonic_events", ok=not bad, detail=f"{len(bad)} out-of-order events", evidence=bad)


def exactly_one_ack(log: EventLog, sent: Optional[Dict[str, int]] = None) -> CheckResult:
    """Per client: acked seqs strictly increase, and the ack count equals commands sent (when known)."""
    per_client: Dict[str, List[Optional[int]]] = defaultdict(list)
    for a in log.acks:
        per_client[a.client].append(a.ack.seq)
    problems = []
    for client, seqs in per_client.items():
        ok_seqs = [
            a.ack.seq for a in log.acks if a.client == client and a.ack.status == "ok" and a.ack.seq is not None
        ]
        if any(b <= a for a, b in zip(ok_seqs, ok_seqs[1:])):
            problems.append(f"{client}: acks out of seq order")
        if sent is not None and sent.get(client, 0) != len(seqs):
            problems.append(f"{client}: {sent.get(client, 0)} commands, {len(seqs)} acks")
    if sent is not None:
        for client, n in sent.items():
            if n and client not in per_client:
                problems.append(f"{client}: {n} commands, 0 acks")
    return CheckResult(
        name="exactly_one_ack",
        ok=not problems,
        detail="; ".join(problems) if problems else "one ack per command, in order",
    )


def run_checks(log: EventLog, sent: Optional[Dict[str, int]] = None, cap: int = 30) -> List[CheckResult]:
    return [
        rate_cap(log.events, cap),
        ack_before_event(log),
        monotonic_events(log.events),
        exactly_one_ack(log, sent),
    ]
