"""Target lists: loading, activation decay, recognition odds and list administration."""

import logging
import math
from typing import Any, Dict, List, Optional

from ..config import AttentionConfig
from ..errors import AttentionError, CapacityFullError, NotFoundError
from ..ontology import OntologyRegistry
from ..perception import HeardObject
from .state import LIST_KINDS, SHORT_TERM, AttentionState, TargetEntry, snapshot

logger = logging.getLogger(__name__)


def pattern_kind(pattern: str, registry: Optional[OntologyRegistry]) -> str:
    """A category or template id is a category pattern; anything else is a word."""
    if registry is not None and (pattern in registry or registry.has_template(pattern)):
        return "category"
    return "word"


def entry_matches(entry: TargetEntry, heard: HeardObject) -> List[Optional[float]]:
    """Match keys for this entry in a candidate: [None] for a category hit, token onsets for words."""
    if entry.pattern_kind == "category":
        cid = heard.category.id
        if entry.pattern in (cid, heard.template) or cid.startswith(entry.pattern + "."):
            return [None]
        return []
    if heard.speech is None:
        return []
    wanted = entry.pattern.lower()
    return [m.t for m in heard.speech.words if m.w.lower() == wanted]


def load_target(
    state: AttentionState,
    pattern: str,
    list_kind: str,
    permanent: bool,
    now: float,
    config: AttentionConfig,
    registry: Optional[OntologyRegistry] = None,
    base_activation: float = 1.0,
) -> str:
    """Add a target (activation 1, load_time now). Duplicates on the same list return the existing id."""
    if list_kind not in LIST_KINDS:
        raise AttentionError(f"unknown list {list_kind!r}")
    if not isinstance(pattern, str) or not pattern.strip():
        raise AttentionError("pattern must be a non-empty string")
    for e in state.entries.values():
        if e.pattern == pattern and e.list_kind == list_kind:
            return e.entry_id
    if list_kind in SHORT_TERM and not permanent:
        used = sum(1 for e in state.entries.values() if e.list_kind in SHORT_TERM and not e.permanent)
        if used >= config.capacity:
            raise CapacityFullError(f"short-term lists hold {used} entries (capacity {config.capacity})")
    entry = TargetEntry(
        entry_id=f"e{state.next_entry}",
        pattern=pattern,
        pattern_kind=pattern_kind(pattern, registry),
        list_kind=list_kind,
        permanent=permanent,
        load_time=now,
        base_activation=base_activation,
    )
    state.next_entry += 1
    state.entries[entry.entry_id] = entry
    logger.info("[Attention] loaded %s %r on %s%s", entry.entry_id, pattern, list_kind, " (permanent)" if permanent else "")
    return entry.entry_id


def half_life(entry: TargetEntry, config: AttentionConfig) -> float:
    if entry.list_kind == "long_term":
        return config.long_term_half_life_s
    return config.short_term_half_life_s


def activation_at(entry: TargetEntry, now: float, config: AttentionConfig, super_ear: bool = False) -> float:
    if entry.permanent or super_ear or entry.list_kind == "ignored":
        return 1.0
    rate = math.log(2.0) / half_life(entry, config)
    if config.decay_coupling == "base_activation":
        rate /= entry.base_activation
    return math.exp(-rate * max(now - entry.load_time, 0.0))


def decay_step(state: AttentionState, now: float, config: AttentionConfig, super_ear: bool = False) -> AttentionState:
    """Recompute every activation at ``now``; permanent entries stay at 1."""
    if now < state.now:
        raise AttentionError(f"decay step at {now} precedes {state.now}")
    state.now = now
    for entry in state.entries.values():
        # floor keeps the (0, 1] invariant once exp underflows
        entry.activation = max(activation_at(entry, now, config, super_ear), 1e-300)
    return state


def recognition_probability(activation: float, config: AttentionConfig, super_ear: bool = False) -> float:
    if super_ear:
        return 1.0
    return 1.0 / (1.0 + math.exp(-(activation - config.theta) / config.slope))


def recognition_latency(activation: float, config: AttentionConfig, super_ear: bool = False) -> float:
    if super_ear:
        return config.base_latency_s
    return config.base_latency_s + config.latency_gain_s * (1.0 - activation)


def remove_target(state: AttentionState, list_kind: str, pattern: str) -> str:
    for e in list(state.entries.values()):
        if e.pattern == pattern and e.list_kind == list_kind:
            del state.entries[e.entry_id]
            return e.entry_id
    raise NotFoundError(f"{pattern!r} is not on {list_kind}")


def list_admin(
    state: AttentionState,
    op: str,
    list_kind: Optional[str],
    pattern: Optional[str],
    now: float,
    config: AttentionConfig,
    registry: Optional[OntologyRegistry] = None,
    permanent: bool = False,
) -> Dict[str, Any]:
    """add / remove / list over the target lists."""
    if list_kind is not None and list_kind not in LIST_KINDS:
        raise AttentionError(f"unknown list {list_kind!r}")
    if op == "add":
        if list_kind is None or pattern is None:
            raise AttentionError("add needs list and pattern")
        return {"entry_id": load_target(state, pattern, list_kind, permanent, now, config, registry)}
    if op == "remove":
        if list_kind is None or pattern is None:
            raise AttentionError("remove needs list and pattern")
        return {"removed": remove_target(state, list_kind, pattern)}
    if op == "list":
        lists = snapshot(state)["lists"]
        return {"lists": {list_kind: lists[list_kind]} if list_kind else lists}
    raise AttentionError(f"unknown list operation {op!r}")
