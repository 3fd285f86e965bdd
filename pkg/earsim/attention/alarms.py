"""Alarm handling: station filter, consolidation, novelty, priority and the per-minute rate cap."""

import logging
from typing import List, Sequence

from ..config import AlarmConfig
from ..ontology import ALARM_PATH, UNKNOWN_ID, OntologyRegistry
from ..perception import HeardObject
from .state import AlarmGroup, AttentionState

logger = logging.getLogger(__name__)


def alarm_type(heard: HeardObject) -> str:
    """Consolidation key: the matched template, else the unknown sound's peak channel."""
    if heard.category.id == UNKNOWN_ID or heard.template is None:
        return f"unknown:{heard.peak_channel}"
    return heard.template


def seed_known_types(state: AttentionState, registry: OntologyRegistry) -> None:
    """Every alarm template the ear was programmed with counts as a known type."""
    for t in registry.templates:
        if registry.is_under(t.category, ALARM_PATH):
            state.known_alarm_types.add(t.id)


def _in_window(state: AttentionState, now: float, config: AlarmConfig) -> int:
    return sum(1 for d in state.alarm_log if d > now - config.rate_window_s)


def alarm_pipeline(
    state: AttentionState,
    candidates: Sequence[HeardObject],
    now: float,
    config: AlarmConfig,
) -> List[HeardObject]:
    """Admit new alarm streams and deliver whatever the rate cap allows at ``now``.

    A stream already admitted is admitted again only when it sounds after at
    least ``rearm_silence_s`` of silence, so a repeating alarm on one held
    stream goes through consolidation once per burst.
    """
    for heard in candidates:
        last_seen = state.alarm_streams.get(heard.stream_id)
        state.alarm_streams[heard.stream_id] = max(heard.t, last_seen if last_seen is not None else heard.t)
        if last_seen is not None and heard.t - last_seen <= config.rearm_silence_s:
            continue
        if last_seen is not None:
            logger.debug("[Alarms] %s sounds again at %.2f", heard.stream_id, heard.t)
        if config.own_station is not None and heard.station_tag is not None and heard.station_tag != config.own_station:
            state.alarm_metrics.dropped_station += 1
            logger.info("[Alarms] dropped %s from station %s", heard.stream_id, heard.station_tag)
            continue
        if heard.loudness < config.station_min_loudness_db:
            state.alarm_metrics.dropped_station += 1
            continue
        key = alarm_type(heard)
        group = state.alarm_groups.get(key)
        if group is not None and now - group.first_t <= config.consolidation_window_s:
            group.count += 1
            state.alarm_metrics.consolidated += 1
            continue
        if group is not None:
            state.alarm_ready.append(state.alarm_groups.pop(key))
        state.alarm_groups[key] = AlarmGroup(key=key, first_t=heard.t, heard=heard)

    for key in [k for k, g in state.alarm_groups.items() if now - g.first_t >= config.consolidation_window_s]:
        state.alarm_ready.append(state.alarm_groups.pop(key))

    for group in state.alarm_ready:
        new = group.heard.category.id == UNKNOWN_ID or group.key not in state.known_alarm_types
        group.heard = group.heard.model_copy(update={"novelty": "new_type" if new else "known_type"})
    state.alarm_ready.sort(key=lambda g: (g.heard.novelty != "new_type", -g.heard.loudness, g.first_t, g.key))

    delivered: List[HeardObject] = []
    while state.alarm_ready:
        if _in_window(state, now, config) >= config.rate_cap_per_min:
            break
        group = state.alarm_ready.pop(0)
        state.alarm_log.append(now)
        state.known_alarm_types.add(group.key)
        heard = group.heard.model_copy(
            update={"id": f"a{state.next_alarm}", "t": round(now, 6), "consolidation_count": group.count}
        )
        state.next_alarm += 1
        delivered.append(heard)
        state.alarm_metrics.delivered += 1
        if _in_window(state, now, config) > config.soft_watermark_per_min:
            state.alarm_metrics.watermark_exceeded += 1
    for group in state.alarm_ready:
        if not group.deferred:
            group.deferred = True
            state.alarm_metrics.deferred += 1
            logger.info("[Alarms] rate cap reached at %.2f, deferring %s", now, group.key)
    horizon = now - config.rate_window_s
    state.alarm_log = [d for d in state.alarm_log if d > horizon]
    state.alarm_metrics.last_minute = len(state.alarm_log)
    return delivered
