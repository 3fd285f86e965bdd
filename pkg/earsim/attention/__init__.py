from .alarms import alarm_pipeline, alarm_type, seed_known_types
from .evaluate import evaluate_frame
from .focus import focus, prune_dead, refocus_previous
from .head import advance_head, heading_at, turn_head
from .state import LIST_KINDS, SHORT_TERM, AlarmGroup, AlarmMetrics, AttentionState, HeadTurn, TargetEntry, snapshot
from .targets import (
    activation_at,
    decay_step,
    entry_matches,
    list_admin,
    load_target,
    pattern_kind,
    recognition_latency,
    recognition_probability,
    remove_target,
)

__all__ = [
    "LIST_KINDS",
    "SHORT_TERM",
    "AlarmGroup",
    "AlarmMetrics",
    "AttentionState",
    "HeadTurn",
    "TargetEntry",
    "activation_at",
    "advance_head",
    "alarm_pipeline",
    "alarm_type",
    "decay_step",
    "entry_matches",
    "evaluate_frame",
    "focus",
    "heading_at",
    "list_admin",
    "load_target",
    "pattern_kind",
    "prune_dead",
    "recognition_latency",
    "recognition_probability",
    "refocus_previous",
    "remove_target",
    "seed_known_types",
    "snapshot",
    "turn_head",
]
