import numpy as np
import pytest

from conftest import make_scene, source_doc
from earsim.config import EarConfig, SegregationConfig
from earsim.ontology import UNKNOWN_ID, shift_signature, spectral_centroid
from earsim.perception import (
    IdentificationContext,
    LocalizationEstimate,
    StreamTrack,
    WordTarget,
    estimate_doppler,
    identify_stream,
    match_words,
)

EAR = EarConfig()
CENTERS = EAR.channel_centers


def _track(registry, template=None, signature=None, azimuth=-70.0, loudness=60.0, source_tag=None, updates=1):
    sig = registry.template_vector(template) if signature is None else signature
    return StreamTrack(
        stream_id="s3",
        birth=0.5,
        last_update=1.0,
        signature_estimate=np.asarray(sig, dtype=float),
        azimuth_track=[LocalizationEstimate(azimuth=azimuth, azimuth_sigma=4.0)],
        loudness=loudness,
        updates=updates,
        source_tag=source_tag,
    )


def _ctx(scene=None, start=0.8, end=1.0, **kw):
    sources = {s.id: s for s in scene.sources} if scene is not None else {}
    return IdentificationContext(
        ear=EAR,
        segregation=SegregationConfig(),
        background_db=20.0,
        window_start=start,
        window_end=end,
        sources=sources,
        **kw,
    )


def _speaker_scene(repeat=None):
    words = [
        {"w": "report", "onset_s": 0.1, "dur_s": 0.3},
        {"w": "HAL", "onset_s": 0.9, "dur_s": 0.3},
    ]
    extra = {"repeat": repeat} if repeat else {}
    return make_scene(
        [
            source_doc(
                "bob",
                "speech_male",
                azimuth=-30.0,
                onset=0.0,
                duration=1.5,
                speech={"speaker_id": "bob", "sex": "male", "words": words},
                **extra,
            )
        ],
        duration=6.0,
    )


def test_known_sound(registry):
    heard = identify_stream(_track(registry, "dog_growl"), registry, _ctx())
    assert heard.category.id == "natural.mammals.dog"
    assert heard.template == "dog_growl"
    assert heard.category.confidence == pytest.approx(1.0)
    assert heard.id == "h3"
    assert heard.stream_id == "s3"
    assert heard.t == 1.0
    assert heard.loudness == pytest.approx(40.0)
    # 70 dB nominal heard at 60 dB: sqrt(10) metres
    assert heard.distance == pytest.approx(10.0 ** 0.5, rel=1e-4)
    assert heard.novelty == "known_type"
    assert heard.modifiers == {"type of sound": "growl"}
    assert not heard.is_alarm_like
    assert heard.speech is None


def test_front_emphasis_removed_before_distance(registry):
    heard = identify_stream(_track(registry, "dog_growl", azimuth=20.0), registry, _ctx())
    assert heard.distance == pytest.approx(10.0 ** (13.0 / 20.0), rel=1e-4)


def test_unknown_sound(registry):
    flat = np.full(EAR.channels, 1.0 / EAR.channels)
    heard = identify_stream(_track(registry, signature=flat), registry, _ctx())
    assert heard.category.id == UNKNOWN_ID
    assert heard.template is None
    assert heard.distance is None
    assert heard.novelty == "new_type"


def test_alarm_template_is_alarm_like(registry):
    heard = identify_stream(_track(registry, "pump_alarm"), registry, _ctx())
    assert heard.is_alarm_like
    assert heard.modifiers["alarm type"] == "pump"


def test_scene_alarm_flag_and_station(registry):
    scene = make_scene([source_doc("horn", "music", is_alarm=True, station="bravo")])
    heard = identify_stream(_track(registry, "music", source_tag="horn"), registry, _ctx(scene))
    assert heard.is_alarm_like
    assert heard.station_tag == "bravo"


def test_speech_fields(registry):
    scene = _speaker_scene()
    ctx = _ctx(scene, start=0.0, end=0.2, word_targets=[WordTarget(w="report")], focused_stream="s3")
    heard = identify_stream(_track(registry, "speech_male", source_tag="bob", azimuth=-30.0), registry, ctx)
    assert heard.speech.speaker_id == "bob"
    assert heard.speech.sex == "male"
    assert [(m.w, m.t) for m in heard.speech.words] == [("report", 0.1)]


def test_unfocused_stream_hears_only_permanent_words(registry):
    scene = _speaker_scene()
    track = _track(registry, "speech_male", source_tag="bob")
    targets = [WordTarget(w="report"), WordTarget(w="hal", permanent=True)]
    assert match_words(track, scene.source("bob"), _ctx(scene, 0.0, 0.2, word_targets=targets)) == []
    found = match_words(track, scene.source("bob"), _ctx(scene, 0.8, 1.0, word_targets=targets))
    assert [m.w for m in found] == ["HAL"]


def test_focused_stream_hears_loaded_words_once(registry):
    scene = _speaker_scene()
    track = _track(registry, "speech_male", source_tag="bob")
    ctx = _ctx(scene, 0.0, 0.2, word_targets=[WordTarget(w="report")], focused_stream="s3")
    assert [m.w for m in match_words(track, scene.source("bob"), ctx)] == ["report"]
    ctx = _ctx(scene, 0.2, 0.4, word_targets=[WordTarget(w="report")], focused_stream="s3")
    assert match_words(track, scene.source("bob"), ctx) == []


def test_drowned_focus_is_not_intelligible(registry):
    scene = _speaker_scene()
    track = _track(registry, "speech_male", source_tag="bob", loudness=50.0)
    targets = [WordTarget(w="report")]
    drowned = _ctx(scene, 0.0, 0.2, word_targets=targets, focused_stream="s3", stream_levels={"s3": 50.0, "s4": 60.0})
    assert match_words(track, scene.source("bob"), drowned) == []
    audible = _ctx(scene, 0.0, 0.2, word_targets=targets, focused_stream="s3", stream_levels={"s3": 50.0, "s4": 52.0})
    assert [m.w for m in match_words(track, scene.source("bob"), audible)] == ["report"]


def test_window_across_two_bursts(registry):
    scene = _speaker_scene(repeat={"period_s": 2.0})
    track = _track(registry, "speech_male", source_tag="bob")
    ctx = _ctx(scene, 1.05, 2.2, word_targets=[WordTarget(w="report"), WordTarget(w="HAL")], focused_stream="s3")
    found = match_words(track, scene.source("bob"), ctx)
    assert [(m.w, m.t) for m in found] == [("HAL", 0.9), ("report", 2.1)]


def test_doppler_against_template(registry):
    sig = shift_signature(registry.template_vector("whistling"), 1.05, CENTERS)
    track = _track(registry, signature=sig, updates=6)
    track.template = "whistling"
    assert estimate_doppler(track, registry, CENTERS) == pytest.approx(1.05, rel=1e-3)


def test_doppler_needs_history(registry):
    sig = shift_signature(registry.template_vector("whistling"), 1.05, CENTERS)
    track = _track(registry, signature=sig, updates=2)
    track.template = "whistling"
    assert estimate_doppler(track, registry, CENTERS) == 1.0


def test_doppler_of_unknown_sound_tracks_drift(registry):
    base = registry.template_vector("whistling")
    track = _track(registry, signature=shift_signature(base, 0.95, CENTERS), updates=6)
    track.birth_centroid = spectral_centroid(base, CENTERS)
    assert estimate_doppler(track, registry, CENTERS) == pytest.approx(0.95, rel=1e-3)


def test_lone_short_burst_matches_as_impulsive(registry):
    track = _track(registry, "dog_bark")
    track.active_runs = [[0.8, 0.9]]
    heard = identify_stream(track, registry, _ctx())
    assert heard.template == "dog_bark"
    assert heard.category.confidence == pytest.approx(1.0)
    # the same burst heard for a whole second is no longer a clean impulsive match
    track.active_runs = [[0.0, 1.0]]
    longer = identify_stream(track, registry, _ctx())
    assert not (longer.template == "dog_bark" and longer.category.confidence == pytest.approx(1.0))
