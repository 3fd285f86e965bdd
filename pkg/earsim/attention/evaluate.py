"""Per-window attention pass: suppression, target recognition, interrupts and the current-sound feed."""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..config import AttentionConfig
from ..perception import HeardObject
from ..protocol.messages import EventMessage
from .state import AttentionState, TargetEntry
from .targets import entry_matches, recognition_latency, recognition_probability

logger = logging.getLogger(__name__)


def _allowed(state: AttentionState, heard: HeardObject) -> bool:
    query = TargetEntry(entry_id="", pattern="", pattern_kind="category", list_kind="ignored", load_time=0.0)
    for pattern in state.interrupt_allow:
        for kind in ("category", "word"):
            query.pattern, query.pattern_kind = pattern, kind
            if entry_matches(query, heard):
                return True
    return False


def evaluate_frame(
    state: AttentionState,
    candidates: Sequence[HeardObject],
    now: float,
    rng: np.random.Generator,
    config: AttentionConfig,
    super_ear: bool = False,
) -> Tuple[List[EventMessage], List[HeardObject], AttentionState]:
    """Turn this window's candidates into events.

    Returns (events, alarm candidates, state). FOUND events carry their
    recognition latency in ``t``; every other event is stamped ``now``.
    Alarm-like candidates go to the alarm pipeline instead of raising INTERRUPT.
    """
    events: List[EventMessage] = []
    alarms: List[HeardObject] = []
    ignored = [e for e in state.entries.values() if e.list_kind == "ignored"]
    targets = sorted((e for e in state.entries.values() if e.list_kind != "ignored"), key=lambda e: int(e.entry_id[1:]))

    for heard in candidates:
        if any(entry_matches(e, heard) for e in ignored):
            logger.debug("[Attention] %s suppressed by ignore list", heard.stream_id)
            continue

        if state.subscribers:
            events.append(EventMessage(kind="SOUND", t=now, heard=heard))
        state.current_sound = heard

        for entry in targets:
            for token in entry_matches(entry, heard):
                key = (entry.entry_id, heard.stream_id, -1.0 if token is None else token)
                if key in state.found_keys:
                    continue
                state.found_keys.add(key)
                p = recognition_probability(entry.activation, config, super_ear)
                # one draw per opportunity, even in super-ear mode, so the stream stays aligned
                if rng.random() >= p:
                    logger.debug("[Attention] %s missed %s (p=%.3f)", entry.entry_id, heard.stream_id, p)
                    continue
                latency = recognition_latency(entry.activation, config, super_ear)
                events.append(
                    EventMessage(
                        kind="FOUND",
                        t=round(now + latency, 6),
                        heard=heard,
                        matched_entry=entry.entry_id,
                        list_kind=entry.list_kind,
                    )
                )

        if heard.is_alarm_like:
            alarms.append(heard)
            continue

        allowed = _allowed(state, heard)
        blocked = state.ignore_interrupts and not allowed
        if heard.speech is not None and heard.stream_id != state.focused:
            names = {e.pattern.lower() for e in targets if e.permanent and e.pattern_kind == "word"}
            for match in heard.speech.words:
                token = (heard.stream_id, match.t)
                if match.w.lower() in names and token not in state.name_tokens and not blocked:
                    state.name_tokens.add(token)
                    events.append(EventMessage(kind="INTERRUPT", t=now, heard=heard, reason="name"))
        if heard.stream_id in state.interrupted_streams:
            continue
        if allowed:
            state.interrupted_streams.add(heard.stream_id)
            events.append(EventMessage(kind="INTERRUPT", t=now, heard=heard, reason="allowed"))
        elif heard.loudness >= config.exogenous_threshold_db and not blocked:
            state.interrupted_streams.add(heard.stream_id)
            events.append(EventMessage(kind="INTERRUPT", t=now, heard=heard, reason="loud"))
    return events, alarms, state
