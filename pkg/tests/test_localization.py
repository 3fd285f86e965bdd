import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_scene, source_doc
from earsim.config import LocalizationConfig
from earsim.frontend import InterauralFeatures, interaural_features, itd_model, render_frame
from earsim.perception import (
    distance_estimate,
    fold_front,
    localize,
    mirror_front_back,
    resolve_front_back,
    sector_sigma,
)
from earsim.scene import wrap_degrees


def _features(itd: float) -> InterauralFeatures:
    return InterauralFeatures(t=0.0, itd=itd, ild=np.zeros(32), summed_loudness=30.0)


@pytest.mark.parametrize(
    "azimuth, sigma",
    [(0.0, 2.0), (30.0, 2.0), (-30.0, 2.0), (60.0, 11.0), (-60.0, 11.0), (90.0, 20.0), (135.0, 20.0)],
)
def test_sector_sigma(azimuth, sigma):
    assert sector_sigma(azimuth) == pytest.approx(sigma)


def test_sector_sigma_follows_config():
    config = LocalizationConfig(sigma_front_deg=1.0, sigma_side_deg=10.0)
    assert sector_sigma(0.0, config) == 1.0
    assert sector_sigma(90.0, config) == 10.0


@pytest.mark.parametrize("azimuth", [-80.0, -40.0, 0.0, 25.0, 70.0])
def test_super_ear_is_exact(ear, azimuth):
    estimate = localize(_features(itd_model(azimuth, ear)), ear, super_ear=True)
    assert estimate.azimuth == pytest.approx(azimuth, abs=1e-6)
    assert estimate.azimuth_sigma == pytest.approx(max(sector_sigma(azimuth), 1e-6))


def test_error_matches_sector_sigma(ear):
    rng = np.random.default_rng(1)
    features = _features(itd_model(75.0, ear))
    draws = np.array([localize(features, ear, rng=rng).azimuth for _ in range(2000)])
    sigma = sector_sigma(75.0)
    assert draws.mean() == pytest.approx(75.0, abs=1.5)
    assert draws.std() == pytest.approx(sigma, rel=0.1)


def test_same_seed_same_estimate(ear):
    features = _features(itd_model(-50.0, ear))
    assert localize(features, ear, rng=5).azimuth == localize(features, ear, rng=5).azimuth


def test_itd_beyond_bound_clamps(ear):
    estimate = localize(_features(-3 * ear.max_itd), ear, rng=0)
    assert estimate.azimuth == -90.0
    assert estimate.azimuth_sigma == LocalizationConfig().sigma_side_deg


def test_distance_estimate():
    distance, confidence = distance_estimate(50.0, 70.0)
    assert distance == pytest.approx(10.0)
    assert confidence == "coarse"
    assert distance_estimate(50.0, None) == (None, "unknown")
    assert distance_estimate(float("nan"), 70.0) == (None, "unknown")


@pytest.mark.parametrize("azimuth, mirrored", [(30.0, 150.0), (-30.0, -150.0), (150.0, 30.0), (90.0, 90.0), (-90.0, -90.0)])
def test_mirror_front_back(azimuth, mirrored):
    assert mirror_front_back(azimuth) == pytest.approx(mirrored)


@given(st.floats(min_value=-179.0, max_value=179.0))
def test_fold_front_stays_in_front(azimuth):
    folded = fold_front(azimuth)
    assert -90.0 <= folded <= 90.0
    assert np.sin(np.radians(folded)) == pytest.approx(np.sin(np.radians(azimuth)), abs=1e-9)


def test_head_turn_resolves_rear_source():
    # world 150: the ear hears 30 facing 0, then 60 after turning to 30
    result = resolve_front_back([30.0, 60.0], [0.0, 30.0])
    assert result.resolved
    assert result.rear
    assert result.azimuth == pytest.approx(150.0)


def test_head_turn_confirms_front_source():
    result = resolve_front_back([30.0, 0.0], [0.0, 30.0])
    assert result.resolved
    assert not result.rear
    assert result.azimuth == pytest.approx(30.0)


@pytest.mark.parametrize(
    "azimuths, headings",
    [
        ([30.0], [0.0]),
        ([30.0, 27.0], [0.0, 3.0]),
        # on the interaural axis both hypotheses predict the same shift
        ([90.0, 60.0], [0.0, 30.0]),
    ],
)
def test_front_back_stays_ambiguous(azimuths, headings):
    assert not resolve_front_back(azimuths, headings).resolved


TURN_TEMPLATES = ["dog_growl", "whistling", "bird_call"]


@given(
    heading=st.integers(-179, 179),
    azimuths=st.lists(st.integers(-80, 80).filter(lambda a: abs(a) != 60), min_size=1, max_size=3),
)
def test_turning_head_and_sources_together_changes_nothing(ear, heading, azimuths):
    """Only the azimuth relative to the head reaches the ears."""
    ahead = make_scene([source_doc(f"s{i}", TURN_TEMPLATES[i], azimuth=float(a)) for i, a in enumerate(azimuths)])
    turned = make_scene(
        [
            source_doc(f"s{i}", TURN_TEMPLATES[i], azimuth=wrap_degrees(a + heading))
            for i, a in enumerate(azimuths)
        ]
    )
    still = render_frame(ahead, ear, 0.0, 1.0)
    moved = render_frame(turned, ear, float(heading), 1.0)
    np.testing.assert_allclose(moved.left_energy, still.left_energy, atol=1e-9)
    np.testing.assert_allclose(moved.right_energy, still.right_energy, atol=1e-9)
    np.testing.assert_allclose(moved.channel_itd, still.channel_itd, atol=1e-12)
    assert moved.channel_source == still.channel_source

    before = localize(interaural_features(ahead, ear, 0.0, 1.0), ear, super_ear=True)
    after = localize(interaural_features(turned, ear, float(heading), 1.0), ear, super_ear=True)
    assert after.azimuth == pytest.approx(before.azimuth, abs=1e-6)
