"""Head control: slewing turns with DONE / CANCELLED notifications."""

import logging
import math
from typing import List, Optional, Tuple

from ..config import AttentionConfig
from ..errors import AttentionError
from ..protocol.messages import EventMessage, HeadDetail
from ..scene import wrap_degrees
from .state import AttentionState, HeadTurn

logger = logging.getLogger(__name__)


def heading_at(state: AttentionState, t: float, config: AttentionConfig) -> float:
    """Instantaneous heading at t, following any in-flight turn."""
    turn = state.head_turn
    if turn is None:
        return state.head_heading
    if t >= turn.eta:
        return turn.target
    moved = config.turn_rate_deg_s * max(t - turn.start_t, 0.0)
    return wrap_degrees(turn.start_heading + math.copysign(min(moved, abs(turn.delta)), turn.delta))


def turn_head(
    state: AttentionState,
    mode: str,
    degrees: float,
    now: float,
    config: AttentionConfig,
    cause_seq: Optional[int] = None,
) -> Tuple[dict, List[EventMessage]]:
    """Start a turn. Returns the ack payload and any immediate events (CANCELLED, zero-length DONE)."""
    if mode not in ("absolute", "relative"):
        raise AttentionError(f"unknown turn mode {mode!r}")
    if degrees is None or not math.isfinite(degrees):
        raise AttentionError("degrees must be finite")
    events: List[EventMessage] = []
    current = heading_at(state, now, config)
    if state.head_turn is not None:
        old = state.head_turn
        events.append(
            EventMessage(
                kind="HEAD_CANCELLED",
                t=now,
                head=HeadDetail(heading=round(current, 4), target=round(old.target, 4), cause_seq=old.cause_seq),
            )
        )
        logger.info("[Head] turn from seq %s cancelled at %.2f", old.cause_seq, now)
    state.head_heading = current
    delta = degrees if mode == "relative" else wrap_degrees(degrees - current)
    if abs(delta) < 1e-9:
        state.head_turn = None
        events.append(
            EventMessage(
                kind="HEAD_DONE",
                t=now,
                head=HeadDetail(heading=round(current, 4), target=round(current, 4), cause_seq=cause_seq),
            )
        )
        return {"target": round(current, 4), "eta": now}, events
    eta = now + abs(delta) / config.turn_rate_deg_s
    state.head_turn = HeadTurn(start_heading=current, delta=delta, start_t=now, eta=eta, cause_seq=cause_seq)
    return {"target": round(state.head_turn.target, 4), "eta": round(eta, 6)}, events


def advance_head(state: AttentionState, t: float, config: AttentionConfig) -> List[EventMessage]:
    """Move the head to its position at t; emits HEAD_DONE stamped at the exact arrival time."""
    turn = state.head_turn
    if turn is None:
        return []
    if t < turn.eta:
        state.head_heading = heading_at(state, t, config)
        return []
    state.head_heading = turn.target
    state.head_turn = None
    logger.info("[Head] reached %.1f at %.3f", turn.target, turn.eta)
    return [
        EventMessage(
            kind="HEAD_DONE",
            t=round(turn.eta, 6),
            head=HeadDetail(heading=round(turn.target, 4), target=round(turn.target, 4), cause_seq=turn.cause_seq),
        )
    ]
