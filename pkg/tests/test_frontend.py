import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_scene, source_doc
from earsim.config import EarConfig
from earsim.frontend import (
    apply_sensitivity,
    dump_frames,
    ild_azimuth_proxy,
    ild_model,
    interaural_features,
    invert_itd,
    itd_model,
    preset_offsets,
    render_frame,
    render_window,
    summed_loudness,
)


@pytest.fixture
def silence():
    return make_scene([], duration=1.0)


def test_itd_shape(ear):
    assert itd_model(0.0, ear) == 0.0
    assert itd_model(90.0, ear) == pytest.approx(ear.max_itd)
    assert itd_model(-90.0, ear) == pytest.approx(-ear.max_itd)
    assert itd_model(30.0, ear) > 0
    # a rear source gives the same cue as its front mirror image
    assert itd_model(150.0, ear) == pytest.approx(itd_model(30.0, ear))
    assert itd_model(-150.0, ear) == pytest.approx(itd_model(-30.0, ear))


@given(st.floats(min_value=0.0, max_value=90.0))
def test_itd_inverts(azimuth):
    ear = EarConfig()
    assert invert_itd(itd_model(azimuth, ear), ear) == pytest.approx(azimuth, abs=1e-6)
    assert invert_itd(-itd_model(azimuth, ear), ear) == pytest.approx(azimuth, abs=1e-6)


def test_invert_itd_clamps(ear):
    assert invert_itd(2 * ear.max_itd, ear) == 90.0
    assert invert_itd(0.0, ear) == 0.0


def test_ild_grows_with_frequency(ear):
    low = ild_model(60.0, 150.0, ear)
    high = ild_model(60.0, 6000.0, ear)
    assert 0 < low < high
    assert ild_model(-60.0, 6000.0, ear) == pytest.approx(-high)
    assert ild_model(0.0, 6000.0, ear) == pytest.approx(0.0)


@given(st.floats(min_value=-89.0, max_value=89.0), st.sampled_from([200.0, 1000.0, 5000.0]))
def test_ild_proxy_inverts(azimuth, center):
    ear = EarConfig()
    proxy = ild_azimuth_proxy(ild_model(azimuth, center, ear), center, ear)
    assert float(proxy) == pytest.approx(azimuth, abs=1e-6)


def test_preset_offsets(ear):
    assert not np.any(preset_offsets("normal", ear))
    aged = preset_offsets("aged", ear)
    centers = ear.channel_centers
    assert np.all(aged[centers <= ear.aged_knee_hz] == 0)
    assert aged[-1] == pytest.approx(ear.aged_max_loss_db)
    assert np.all(np.diff(aged) >= 0)
    damaged = preset_offsets("damaged", ear)
    assert damaged[ear.notch_channel] == ear.notch_depth_db
    assert np.count_nonzero(damaged) == 1
    custom = EarConfig(sensitivity_preset="custom", custom_offsets=[float(i) for i in range(32)])
    assert preset_offsets("custom", custom)[5] == 5.0
    with pytest.raises(ValueError):
        preset_offsets("bionic", ear)


def test_custom_preset_needs_offsets():
    with pytest.raises(ValueError):
        EarConfig(sensitivity_preset="custom")


def test_silence_is_background(silence, ear):
    frame = render_frame(silence, ear, 0.0, 0.5)
    assert np.allclose(frame.left_energy, 20.0)
    assert np.allclose(frame.right_energy, 20.0)
    assert not np.any(frame.channel_itd)
    assert frame.channel_source == [None] * ear.channels
    assert summed_loudness(frame.left_energy, frame.right_energy, frame.background_db) == 0.0


def test_lateral_source_cues(ear):
    scene = make_scene([source_doc("dog", "dog_growl", azimuth=60.0, distance=3.0)])
    frame = render_frame(scene, ear, 0.0, 0.5)
    peak = int(np.argmax(frame.left_energy + frame.right_energy))
    assert frame.channel_source[peak] == "dog"
    assert frame.right_energy[peak] > frame.left_energy[peak]
    assert frame.channel_itd[peak] == pytest.approx(itd_model(60.0, ear))
    features = interaural_features(scene, ear, 0.0, 0.5)
    assert features.itd == pytest.approx(itd_model(60.0, ear))
    assert features.summed_loudness > 0


def test_head_heading_moves_the_source(ear):
    scene = make_scene([source_doc("dog", "dog_growl", azimuth=60.0, distance=3.0)])
    facing = interaural_features(scene, ear, 60.0, 0.5)
    assert facing.itd == pytest.approx(0.0, abs=1e-12)


def test_front_emphasis(ear):
    scene = make_scene(
        [
            source_doc("front", "whistling", azimuth=0.0, distance=2.0, onset=0.0, duration=1.0),
            source_doc("side", "whistling", azimuth=90.0, distance=2.0, onset=1.5, duration=1.0),
        ]
    )
    front = render_frame(scene, ear, 0.0, 0.5)
    side = render_frame(scene, ear, 0.0, 2.0)
    peak = int(np.argmax(front.left_energy))
    front_level = 0.5 * (front.left_energy[peak] + front.right_energy[peak])
    side_level = 0.5 * (side.left_energy[peak] + side.right_energy[peak])
    assert front_level - side_level == pytest.approx(ear.front_emphasis_db, abs=0.05)


def test_dynamic_range_gate(ear):
    loud = make_scene([source_doc("bang", "gunfire", distance=1.0, level=175.0)])
    frame = render_frame(loud, ear, 0.0, 0.5)
    assert frame.left_energy.max() == pytest.approx(20.0 + ear.max_gate_db)
    faint = make_scene([source_doc("drip", "dripping", distance=1.0, level=25.0)])
    frame = render_frame(faint, ear, 0.0, 0.5)
    assert np.allclose(frame.left_energy, 20.0)


def test_aged_ear_loses_high_channels():
    aged = EarConfig(sensitivity_preset="aged")
    scene = make_scene([source_doc("crickets", "insects", distance=1.0, level=42.0)])
    normal = render_frame(scene, aged, 0.0, 0.5)
    heard = apply_sensitivity(normal, aged)
    assert normal.left_energy.max() > 25.0
    assert np.allclose(heard.left_energy, 20.0)
    assert np.all(heard.right_energy >= 20.0)


def test_render_window_applies_sensitivity():
    aged = EarConfig(sensitivity_preset="aged")
    scene = make_scene([source_doc("crickets", "insects", distance=1.0, level=42.0)])
    window = render_window(scene, aged, [0.0] * 4, [0.0, 0.05, 0.1, 0.15])
    assert len(window) == 4
    for frame, features in window:
        assert features.summed_loudness == 0.0
        assert np.allclose(features.ild, 0.0)


def test_dump_frames(tmp_path, silence, ear):
    frames = [render_frame(silence, ear, 0.0, t) for t in (0.0, 0.05, 0.1)]
    path = tmp_path / "out" / "frames.csv"
    assert dump_frames(frames, str(path)) == 6
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0][:3] == ["t", "ear", "ch0"]
    assert len(rows[0]) == 2 + ear.channels
    assert rows[1][1] == "left"
    assert rows[2][1] == "right"


@given(st.floats(min_value=-179.0, max_value=179.0))
def test_itd_is_antisymmetric(azimuth):
    ear = EarConfig()
    assert itd_model(-azimuth, ear) == pytest.approx(-itd_model(azimuth, ear), abs=1e-12)
    assert abs(itd_model(azimuth, ear)) <= ear.max_itd + 1e-12
