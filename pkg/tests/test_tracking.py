import numpy as np
import pytest

from earsim.config import EarConfig
from earsim.ontology import make_signature
from earsim.perception import Cluster, LocalizationEstimate, StreamTracker, observed_envelope, sector_sigma

CENTERS = EarConfig().channel_centers


def _cluster(t, onset=None, band=1390.0, loudness=60.0):
    return Cluster(
        label=0,
        cells=[(0, 0)],
        profile=make_signature([band], 0.2, CENTERS) * 1e6,
        azimuth_proxy=0.0,
        itd=0.0,
        ild=np.zeros(len(CENTERS)),
        loudness_db=loudness,
        onset=t - 0.15 if onset is None else onset,
        t_last=t,
    )


def _estimate(azimuth):
    return LocalizationEstimate(azimuth=azimuth, azimuth_sigma=sector_sigma(azimuth))


def _feed(tracker, t, azimuths, heading=0.0, band=1390.0, onset=None):
    clusters = [_cluster(t, onset, band) for _ in azimuths]
    return tracker.update(clusters, [_estimate(a) for a in azimuths], t, heading)


def test_same_source_keeps_its_stream():
    tracker = StreamTracker()
    first = _feed(tracker, 0.2, [10.0])
    second = _feed(tracker, 0.4, [12.0])
    assert first.born == ["s1"]
    assert second.born == []
    assert second.updated == ["s1"]
    track = tracker.get("s1")
    assert track.updates == 2
    assert track.world_azimuth == pytest.approx(12.0)
    assert track.birth == pytest.approx(0.05)


def test_azimuth_gate():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [0.0])
    # gate: 25 + 2 sigma(2) = 29 degrees
    assert _feed(tracker, 0.4, [28.0]).born == []
    tracker = StreamTracker()
    _feed(tracker, 0.2, [0.0])
    assert _feed(tracker, 0.4, [31.0]).born == ["s2"]


def test_signature_gate():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [0.0], band=1390.0)
    update = _feed(tracker, 0.4, [0.0], band=5570.0)
    assert update.born == ["s2"]


def test_two_sources_two_streams():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [-60.0, 60.0])
    update = _feed(tracker, 0.4, [58.0, -61.0])
    assert sorted(update.updated) == ["s1", "s2"]
    assert tracker.get("s1").world_azimuth == pytest.approx(-61.0)
    assert tracker.get("s2").world_azimuth == pytest.approx(58.0)


def test_head_turn_keeps_world_position():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [30.0], heading=0.0)
    update = _feed(tracker, 0.4, [0.0], heading=30.0)
    assert update.born == []
    track = tracker.get("s1")
    assert track.world_azimuth == pytest.approx(30.0)
    assert track.front_back_resolved
    assert not track.rear


def test_silent_stream_expires_and_ids_are_not_reused():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [0.0])
    assert tracker.update([], [], 1.0, 0.0).ended == []
    ended = tracker.update([], [], 1.4, 0.0).ended
    assert [t.stream_id for t in ended] == ["s1"]
    assert not tracker.alive("s1")
    assert _feed(tracker, 1.6, [0.0]).born == ["s2"]


def test_repeating_sound_holds_its_stream():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [0.0])
    tracker.get("s1").template_envelope = "repeating"
    assert tracker.update([], [], 5.0, 0.0).ended == []
    update = _feed(tracker, 5.2, [0.0])
    assert update.born == []
    track = tracker.get("s1")
    assert track.repetition_seen
    assert observed_envelope(track) == "repeating"


def test_observed_envelope_grows_up():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [0.0])
    track = tracker.get("s1")
    assert observed_envelope(track) is None
    _feed(tracker, 0.4, [0.0], onset=0.25)
    assert observed_envelope(track) == "sustained"


def test_short_isolated_burst_is_impulsive():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [0.0])
    track = tracker.get("s1")
    assert observed_envelope(track, now=0.2) is None
    assert observed_envelope(track, now=0.35) == "impulsive"
    _feed(tracker, 0.8, [0.0], onset=0.7)
    assert observed_envelope(track, now=0.8) == "repeating"


def test_time_must_not_go_back():
    tracker = StreamTracker()
    _feed(tracker, 0.4, [0.0])
    with pytest.raises(ValueError):
        tracker.update([], [], 0.2, 0.0)


def test_close_all():
    tracker = StreamTracker()
    _feed(tracker, 0.2, [-60.0, 60.0])
    assert sorted(t.stream_id for t in tracker.close_all()) == ["s1", "s2"]
    assert tracker.tracks == {}
