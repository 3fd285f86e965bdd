"""Attention state owned by the engine timeline."""

from typing import Any, Dict, List, Literal, Optional, Set, Tuple

from pydantic import BaseModel, Field

from ..perception import HeardObject
from ..scene import wrap_degrees

ListKind = Literal["short_term_primary", "short_term_secondary", "long_term", "ignored"]
LIST_KINDS = ("short_term_primary", "short_term_secondary", "long_term", "ignored")
SHORT_TERM = ("short_term_primary", "short_term_secondary")


class TargetEntry(BaseModel):
    entry_id: str
    pattern: str
    pattern_kind: Literal["category", "word"]
    list_kind: ListKind
    permanent: bool = False
    load_time: float
    activation: float = Field(1.0, gt=0, le=1)
    # only read when decay is coupled to a cognition-side base activation
    base_activation: float = Field(1.0, gt=0, le=1)


class HeadTurn(BaseModel):
    start_heading: float
    delta: float
    start_t: float
    eta: float
    cause_seq: Optional[int] = None

    @property
    def target(self) -> float:
        return wrap_degrees(self.start_heading + self.delta)


class AlarmGroup(BaseModel):
    """Alarm candidates of one type merging within the consolidation window."""

    key: str
    first_t: float
    heard: HeardObject
    count: int = 1
    deferred: bool = False


class AlarmMetrics(BaseModel):
    delivered: int = 0
    deferred: int = 0
    consolidated: int = 0
    dropped_station: int = 0
    watermark_exceeded: int = 0
    last_minute: int = 0


class AttentionState(BaseModel):
    entries: Dict[str, TargetEntry] = Field(default_factory=dict)
    next_entry: int = 1
    ignore_interrupts: bool = False
    interrupt_allow: List[str] = Field(default_factory=list)
    focused: Optional[str] = None
    focus_stack: List[str] = Field(default_factory=list)
    head_heading: float = 0.0
    head_turn: Optional[HeadTurn] = None
    subscribers: Set[str] = Field(default_factory=set)
    current_sound: Optional[HeardObject] = None
    now: float = 0.0

    alarm_log: List[float] = Field(default_factory=list)
    alarm_groups: Dict[str, AlarmGroup] = Field(default_factory=dict)
    alarm_ready: List[AlarmGroup] = Field(default_factory=list)
    # alarm stream id -> last time it was offered to the pipeline
    alarm_streams: Dict[str, float] = Field(default_factory=dict)
    known_alarm_types: Set[str] = Field(default_factory=set)
    next_alarm: int = 1
    alarm_metrics: AlarmMetrics = Field(default_factory=AlarmMetrics)

    # dedupe keys for FOUND and INTERRUPT
    found_keys: Set[Tuple[str, str, float]] = Field(default_factory=set)
    interrupted_streams: Set[str] = Field(default_factory=set)
    name_tokens: Set[Tuple[str, float]] = Field(default_factory=set)


def snapshot(state: AttentionState) -> Dict[str, Any]:
    """Read-only view for CURRENT_SOUND, LIST_QUERY and the control panel."""
    lists: Dict[str, List[Dict[str, Any]]] = {k: [] for k in LIST_KINDS}
    for e in state.entries.values():
        lists[e.list_kind].append(
            {
                "entry_id": e.entry_id,
                "pattern": e.pattern,
                "permanent": e.permanent,
                "activation": round(e.activation, 6),
                "age": round(state.now - e.load_time, 6),
            }
        )
    return {
        "t": round(state.now, 6),
        "lists": lists,
        "ignore_interrupts": state.ignore_interrupts,
        "interrupt_allow": list(state.interrupt_allow),
        "focused": state.focused,
        "focus_stack": list(state.focus_stack),
        "head_heading": round(state.head_heading, 4),
        "head_turning": state.head_turn is not None,
        "current_sound": state.current_sound.model_dump(mode="json") if state.current_sound else None,
        "alarms": state.alarm_metrics.model_dump(),
    }
