"""Stream identification: ontology match (Doppler corrected), gated word matching, HeardObject assembly."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..config import EarConfig, SegregationConfig
from ..ontology import ALARM_PATH, SPEECH_PATH, UNKNOWN_ID, OntologyRegistry, shift_signature, spectral_centroid
from ..scene import SoundSource, burst_start
from .localization import distance_estimate
from .state import CategoryGuess, HeardObject, SpeechFields, WordMatch, WordTarget
from .tracking import StreamTrack, observed_envelope

logger = logging.getLogger(__name__)


class IdentificationContext(BaseModel):
    """Everything identification needs besides the track and the registry."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    ear: EarConfig
    segregation: SegregationConfig
    background_db: float
    window_start: float
    window_end: float
    sources: Dict[str, SoundSource] = Field(default_factory=dict)
    word_targets: List[WordTarget] = Field(default_factory=list)
    focused_stream: Optional[str] = None
    # peak levels (dB) of every stream heard in this window, by stream id
    stream_levels: Dict[str, float] = Field(default_factory=dict)


def estimate_doppler(
    track: StreamTrack,
    registry: OntologyRegistry,
    channel_centers: np.ndarray,
    min_updates: int = 5,
) -> float:
    """Observed / emitted frequency ratio from spectral centroids.

    Known template: centroid against the template's centroid over the same
    channels. Unknown: drift relative to the centroid at birth.
    """
    if track.updates < min_updates:
        return 1.0
    observed = track.signature_estimate
    centroid = spectral_centroid(observed, channel_centers)
    if centroid <= 0:
        return 1.0
    if track.template is not None and registry.has_template(track.template):
        # truncate the template at the same relative depth the cell threshold cut the observation
        template = registry.template_vector(track.template)
        depth = observed[observed > 0].min() / observed.max()
        reference = np.where(template >= depth * template.max(), template, 0.0)
        base = spectral_centroid(reference, channel_centers)
    else:
        base = track.birth_centroid
    if base <= 0:
        return 1.0
    return float(centroid / base)


def _intelligible(track: StreamTrack, ctx: IdentificationContext) -> bool:
    others = [lvl for sid, lvl in ctx.stream_levels.items() if sid != track.stream_id and np.isfinite(lvl)]
    if not others:
        return True
    competing = 10.0 * np.log10(np.sum(np.power(10.0, np.asarray(others) / 10.0)))
    return track.loudness > competing - ctx.segregation.intelligibility_margin_db


def _window_tokens(source: SoundSource, start: float, end: float):
    """Absolute (word, onset, end) tokens of ``source`` overlapping [start, end]."""
    if source.speech is None:
        return []
    tokens = []
    seen = set()
    # a window may straddle two bursts of a repeating source
    for edge in (start, end):
        b = burst_start(source, edge)
        if b is None or b in seen:
            continue
        seen.add(b)
        for w in source.speech.words:
            onset = b + w.onset_s
            if onset <= end and onset + w.dur_s > start:
                tokens.append((w.w, onset, onset + w.dur_s))
    return tokens


def match_words(track: StreamTrack, source: SoundSource, ctx: IdentificationContext) -> List[WordMatch]:
    """Loaded words heard in this window. Unfocused streams only reach permanent words."""
    focused = ctx.focused_stream == track.stream_id
    if focused and not _intelligible(track, ctx):
        return []
    allowed = {t.w.lower() for t in ctx.word_targets if focused or t.permanent}
    if not allowed:
        return []
    out = []
    for word, onset, _end in _window_tokens(source, ctx.window_start, ctx.window_end):
        if word.lower() not in allowed:
            continue
        key = (word, round(onset, 6))
        if key in track.speech_matches:
            continue
        track.speech_matches.append(key)
        out.append(WordMatch(w=word, t=round(onset, 6)))
    return out


def identify_stream(track: StreamTrack, registry: OntologyRegistry, ctx: IdentificationContext) -> HeardObject:
    """Classify the track and package it as a HeardObject candidate."""
    centers = ctx.ear.channel_centers
    seg = ctx.segregation
    if track.updates <= 1 or track.birth_centroid <= 0:
        track.birth_centroid = spectral_centroid(track.signature_estimate, centers)

    envelope = observed_envelope(track, seg.impulsive_max_s, now=ctx.window_end)
    raw = registry.best_match(track.signature_estimate, envelope)
    track.template = raw.template.id if raw.template else track.template
    ratio = estimate_doppler(track, registry, centers, seg.min_doppler_updates)
    match = raw
    if abs(ratio - 1.0) > 1e-9:
        corrected = shift_signature(track.signature_estimate, 1.0 / ratio, centers)
        match = registry.best_match(corrected, envelope)
    track.doppler_ratio = ratio
    track.spectral_centroid = spectral_centroid(track.signature_estimate, centers)
    track.category = CategoryGuess(id=match.category_id, confidence=round(match.confidence, 6))
    track.template = match.template.id if match.template else None
    track.template_envelope = match.template.envelope if match.template else None

    source = ctx.sources.get(track.source_tag) if track.source_tag else None
    track.station_tag = source.station if source else None
    track.is_alarm_like = bool(source and source.is_alarm) or registry.is_under(match.category_id, ALARM_PATH)

    azimuth = track.azimuth
    sigma = track.azimuth_track[-1].azimuth_sigma if track.azimuth_track else 0.0
    observed = track.loudness
    if abs(azimuth) <= ctx.ear.front_sector_deg:
        observed -= ctx.ear.front_emphasis_db
    distance, _ = distance_estimate(observed, match.template.nominal_level if match.template else None)

    speech = None
    if source is not None and source.speech is not None and registry.is_under(match.category_id, SPEECH_PATH):
        speech = SpeechFields(
            speaker_id=source.speech.speaker_id,
            sex=source.speech.sex,
            delivery=source.speech.delivery,
            words=match_words(track, source, ctx),
        )

    return HeardObject(
        id=f"h{track.stream_id[1:]}",
        stream_id=track.stream_id,
        t=round(ctx.window_end, 6),
        category=track.category,
        template=track.template,
        azimuth=round(azimuth, 4),
        azimuth_sigma=round(sigma, 4),
        front_back_resolved=track.front_back_resolved,
        distance=round(distance, 4) if distance is not None else None,
        onset=round(track.birth, 6),
        duration=round(track.duration, 6),
        repetition=track.repetition_seen,
        loudness=round(max(track.loudness - ctx.background_db, 0.0), 4),
        centroid_hz=round(track.spectral_centroid, 3),
        doppler_ratio=round(ratio, 6),
        speech=speech,
        modifiers=dict(match.template.modifiers) if match.template else {},
        novelty="new_type" if match.category_id == UNKNOWN_ID else "known_type",
        station_tag=track.station_tag,
        is_alarm_like=track.is_alarm_like,
        peak_channel=track.peak_channel,
    )


def identify_all(
    tracks: Sequence[StreamTrack],
    registry: OntologyRegistry,
    ctx: IdentificationContext,
) -> List[HeardObject]:
    return [identify_stream(t, registry, ctx) for t in tracks]
