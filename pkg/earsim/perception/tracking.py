"""Stream tracking across windows: gated assignment, birth, expiry and repetition."""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import linear_sum_assignment

from ..config import LocalizationConfig, SegregationConfig
from ..ontology import cosine_similarity, normalize, spectral_centroid
from ..scene import wrap_degrees
from .localization import mirror_front_back, resolve_front_back, sector_sigma
from .state import CategoryGuess, Cluster, LocalizationEstimate

logger = logging.getLogger(__name__)

_INFEASIBLE = 1e9
# keep this many localization samples per track
HISTORY = 200
# a repeating sound may stay silent this long and keep its stream
REPEAT_HOLD_S = 10.0


class StreamTrack(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    stream_id: str
    birth: float
    last_update: float
    azimuth_track: List[LocalizationEstimate] = Field(default_factory=list)
    heading_track: List[float] = Field(default_factory=list)
    world_azimuth: float = 0.0
    rear: bool = False
    front_back_resolved: bool = False
    spectral_centroid: float = 0.0
    birth_centroid: float = 0.0
    signature_estimate: np.ndarray
    loudness: float = 0.0
    loudness_history: List[Tuple[float, float]] = Field(default_factory=list)
    active_runs: List[List[float]] = Field(default_factory=list)
    updates: int = 0
    doppler_ratio: float = 1.0
    category: CategoryGuess = Field(default_factory=lambda: CategoryGuess(id="unknown", confidence=0.0))
    template: Optional[str] = None
    template_envelope: Optional[str] = None
    speech_matches: List[Tuple[str, float]] = Field(default_factory=list)
    heard_tokens: List[Tuple[str, float]] = Field(default_factory=list)
    repetition_seen: bool = False
    is_alarm_like: bool = False
    station_tag: Optional[str] = None
    source_tag: Optional[str] = None
    peak_channel: int = 0
    # latest window's cluster, consumed by identification
    cluster: Optional[Cluster] = None
    last_heading: float = 0.0

    @property
    def azimuth(self) -> float:
        """Latest relative azimuth, mirrored when the source is known to be behind."""
        if not self.azimuth_track:
            return 0.0
        a = self.azimuth_track[-1].azimuth
        return mirror_front_back(a) if self.rear else a

    @property
    def duration(self) -> float:
        return max(self.last_update - self.birth, 0.0)


class TrackUpdate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    born: List[str] = Field(default_factory=list)
    updated: List[str] = Field(default_factory=list)
    ended: List[StreamTrack] = Field(default_factory=list)


class StreamTracker:
    """Owns every live track of one ear; stream ids are never reused."""

    def __init__(
        self,
        config: Optional[SegregationConfig] = None,
        localization: Optional[LocalizationConfig] = None,
        hop: float = 0.05,
    ):
        self.config = config or SegregationConfig()
        self.localization = localization or LocalizationConfig()
        self.hop = hop
        self.tracks: Dict[str, StreamTrack] = {}
        self._next = 1
        self._last_t = float("-inf")

    def _new_id(self) -> str:
        sid = f"s{self._next}"
        self._next += 1
        return sid

    def alive(self, stream_id: str) -> bool:
        return stream_id in self.tracks

    def get(self, stream_id: str) -> Optional[StreamTrack]:
        return self.tracks.get(stream_id)

    def _gates(self, track: StreamTrack, relative: float, heading: float) -> Tuple[float, float]:
        turn = abs(wrap_degrees(heading - track.last_heading))
        az_gate = self.config.gate_azimuth_deg + 2.0 * sector_sigma(relative, self.localization) + 2.0 * turn
        sig_gate = self.config.gate_signature + self.config.doppler_gate_gain * abs(np.log(track.doppler_ratio))
        return az_gate, sig_gate

    def _cost(self, track: StreamTrack, cluster: Cluster, estimate: LocalizationEstimate, heading: float) -> float:
        relative = mirror_front_back(estimate.azimuth) if track.rear else estimate.azimuth
        az_gate, sig_gate = self._gates(track, relative, heading)
        d_az = abs(wrap_degrees(relative + heading - track.world_azimuth))
        d_sig = 1.0 - cosine_similarity(track.signature_estimate, cluster.profile)
        if d_az > az_gate or d_sig > sig_gate:
            return _INFEASIBLE
        return d_az / az_gate + d_sig / sig_gate

    def update(
        self,
        clusters: List[Cluster],
        estimates: List[LocalizationEstimate],
        t: float,
        head_heading: float,
    ) -> TrackUpdate:
        """Match this window's clusters to tracks, birth the rest, expire silent tracks."""
        if t < self._last_t:
            raise ValueError(f"track update at {t} precedes {self._last_t}")
        self._last_t = t
        result = TrackUpdate()
        live = list(self.tracks.values())
        matched: Dict[int, StreamTrack] = {}
        if live and clusters:
            cost = np.array([[self._cost(tr, c, e, head_heading) for c, e in zip(clusters, estimates)] for tr in live])
            rows, cols = linear_sum_assignment(cost)
            for r, c in zip(rows, cols):
                if cost[r, c] < _INFEASIBLE:
                    matched[c] = live[r]

        for i, (cluster, estimate) in enumerate(zip(clusters, estimates)):
            track = matched.get(i)
            if track is None:
                track = self._birth(cluster, t, head_heading)
                result.born.append(track.stream_id)
            self._absorb(track, cluster, estimate, t, head_heading)
            result.updated.append(track.stream_id)

        for track in live:
            hold = REPEAT_HOLD_S if track.template_envelope == "repeating" else self.config.expiry_s
            if track.stream_id not in result.updated and t - track.last_update > hold:
                result.ended.append(self.tracks.pop(track.stream_id))
                logger.debug("[Tracking] %s ended at %.2f", track.stream_id, t)
        return result

    def close_all(self) -> List[StreamTrack]:
        ended = list(self.tracks.values())
        self.tracks.clear()
        return ended

    def _birth(self, cluster: Cluster, t: float, heading: float) -> StreamTrack:
        sid = self._new_id()
        track = StreamTrack(
            stream_id=sid,
            birth=cluster.onset,
            last_update=t,
            signature_estimate=normalize(cluster.profile),
            last_heading=heading,
        )
        self.tracks[sid] = track
        logger.debug("[Tracking] born %s at %.2f", sid, t)
        return track

    def _absorb(self, track: StreamTrack, cluster: Cluster, estimate: LocalizationEstimate, t: float, heading: float) -> None:
        gap = cluster.onset - track.last_update
        if track.updates and gap > self.hop * 1.5:
            # silence inside a live stream, then sound again
            track.repetition_seen = True
            track.active_runs.append([cluster.onset, cluster.t_last])
        elif track.active_runs:
            track.active_runs[-1][1] = cluster.t_last
        else:
            track.active_runs.append([cluster.onset, cluster.t_last])

        track.azimuth_track.append(estimate)
        track.heading_track.append(heading)
        del track.azimuth_track[:-HISTORY]
        del track.heading_track[:-HISTORY]
        if not track.front_back_resolved and len(track.azimuth_track) >= 2:
            fb = resolve_front_back(
                [track.azimuth_track[0].azimuth, estimate.azimuth],
                [track.heading_track[0], heading],
                self.localization,
            )
            if fb.resolved:
                track.front_back_resolved = True
                track.rear = fb.rear
        relative = mirror_front_back(estimate.azimuth) if track.rear else estimate.azimuth
        track.world_azimuth = wrap_degrees(relative + heading)
        track.last_heading = heading

        sig = normalize(cluster.profile)
        track.signature_estimate = sig if track.updates == 0 else normalize(0.5 * track.signature_estimate + 0.5 * sig)
        track.cluster = cluster
        track.loudness = cluster.loudness_db
        track.loudness_history.append((t, cluster.loudness_db))
        del track.loudness_history[:-HISTORY]
        track.peak_channel = int(np.argmax(cluster.profile))
        track.last_update = cluster.t_last
        if cluster.source_tag is not None:
            track.source_tag = cluster.source_tag
        track.updates += 1


def track_streams(
    tracker: StreamTracker,
    clusters: List[Cluster],
    estimates: List[LocalizationEstimate],
    t: float,
    head_heading: float,
) -> TrackUpdate:
    return tracker.update(clusters, estimates, t, head_heading)


def observed_envelope(track: StreamTrack, impulsive_max_s: float = 0.3, now: Optional[float] = None) -> Optional[str]:
    """Envelope as heard so far; None while a young single burst is still ambiguous.

    A lone burst no longer than ``impulsive_max_s`` that has gone quiet by
    ``now`` is impulsive. It becomes repeating if it sounds again.
    """
    if track.repetition_seen or len(track.active_runs) > 1:
        return "repeating"
    if not track.active_runs:
        return None
    start, end = track.active_runs[0]
    if end - start > impulsive_max_s:
        return "sustained"
    if now is not None and now > end + 1e-9:
        return "impulsive"
    return None


def centroid_of(track: StreamTrack, channel_centers: np.ndarray) -> float:
    return spectral_centroid(track.signature_estimate, channel_centers)
