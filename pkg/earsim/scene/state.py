"""Ground-truth queries over a scene: where each source is and whether it sounds."""

import math
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from .model import AuditoryScene, SoundSource, WordToken

_TIME_EPS = 1e-9


class SourceState(NamedTuple):
    active: bool
    azimuth: float
    distance: float
    level_at_ear: float
    radial_velocity: float


def wrap_degrees(deg: float) -> float:
    """Wrap to [-180, 180)."""
    return float((deg + 180.0) % 360.0 - 180.0)


def level_at_distance(level_db_at_1m: float, distance_m: float) -> float:
    return level_db_at_1m - 20.0 * math.log10(distance_m)


def burst_start(source: SoundSource, t: float) -> Optional[float]:
    """Start time of the burst sounding at t, or None when the source is silent."""
    if t + _TIME_EPS < source.onset_s:
        return None
    rel = t - source.onset_s
    if source.repeat is not None:
        k = math.floor((rel + _TIME_EPS) / source.repeat.period_s)
        start = source.onset_s + k * source.repeat.period_s
    else:
        start = source.onset_s
    if t - start < source.duration_s - _TIME_EPS:
        return start
    return None


def _geometry(source: SoundSource, t: float):
    times = np.array([k.t_s for k in source.trajectory])
    # unwrap so a source passing behind the head takes the short way round
    az = np.degrees(np.unwrap(np.radians([k.azimuth_deg for k in source.trajectory])))
    dist = np.array([k.distance_m for k in source.trajectory])
    azimuth = wrap_degrees(float(np.interp(t, times, az)))
    distance = float(np.interp(t, times, dist))
    velocity = 0.0
    if len(times) > 1 and times[0] <= t < times[-1]:
        i = int(np.searchsorted(times, t, side="right")) - 1
        velocity = float((dist[i + 1] - dist[i]) / (times[i + 1] - times[i]))
    return azimuth, distance, velocity


def source_state_at(scene: AuditoryScene, source_id: str, t: float) -> SourceState:
    """Activity, position, level at the ear and radial velocity (m/s, + = receding)."""
    source = scene.source(source_id)
    azimuth, distance, velocity = _geometry(source, t)
    return SourceState(
        active=burst_start(source, t) is not None,
        azimuth=azimuth,
        distance=distance,
        level_at_ear=level_at_distance(source.level_db_at_1m, distance),
        radial_velocity=velocity,
    )


def active_sources(scene: AuditoryScene, t: float) -> List[str]:
    return [s.id for s in scene.sources if burst_start(s, t) is not None]


def words_at(source: SoundSource, t: float) -> List[WordToken]:
    """Word tokens (absolute onset) spoken by the source at time t."""
    if source.speech is None:
        return []
    start = burst_start(source, t)
    if start is None:
        return []
    out = []
    for w in source.speech.words:
        onset = start + w.onset_s
        if onset - _TIME_EPS <= t < onset + w.dur_s - _TIME_EPS:
            out.append(WordToken(w=w.w, onset_s=onset, dur_s=w.dur_s))
    return out


def source_index(scene: AuditoryScene) -> Dict[str, SoundSource]:
    return {s.id: s for s in scene.sources}
