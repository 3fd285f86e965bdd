import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from earsim.config import EarConfig
from earsim.errors import MalformedSignatureError, NotFoundError, OntologyError, UnknownCategoryError
from earsim.ontology import (
    ALARM_PATH,
    SPEECH_PATH,
    UNKNOWN_ID,
    SoundCategory,
    dump_ontology,
    load_builtin_ontology,
    load_ontology,
    make_signature,
    shift_signature,
    spectral_centroid,
)
from earsim.ontology.builtin import CATEGORY_ROWS, TEMPLATE_ROWS
from earsim.ontology.signatures import check_signature

CENTERS = EarConfig().channel_centers


def test_builtin_has_every_row(registry):
    assert len(registry) == len(TEMPLATE_ROWS)
    # taxonomy rows plus Unknown
    assert len(registry.categories) == len(CATEGORY_ROWS) + 1
    assert UNKNOWN_ID in registry
    assert registry.frozen


@pytest.mark.parametrize("template_id", [row[0] for row in TEMPLATE_ROWS])
def test_template_matches_itself(registry, template_id):
    template = registry.get_template(template_id)
    match = registry.best_match(registry.template_vector(template_id), template.envelope)
    assert match.template is not None
    assert match.template.id == template_id
    assert match.category_id == template.category
    assert match.confidence == pytest.approx(1.0)


def test_flat_spectrum_is_unknown(registry):
    match = registry.best_match(np.full(registry.channels, 1.0 / registry.channels))
    assert match.category_id == UNKNOWN_ID
    assert match.confidence == 0.0
    assert match.template is None


def test_envelope_mismatch_scales_confidence(registry):
    vector = registry.template_vector("dog_growl")
    match = registry.best_match(vector, "impulsive")
    assert match.template.id == "dog_growl"
    assert match.confidence == pytest.approx(registry.envelope_mismatch)


def test_classify_returns_pair(registry):
    category, confidence = registry.classify(registry.template_vector("bird_call"), "repeating")
    assert category == "natural.birds"
    assert confidence == pytest.approx(1.0)


def test_wrong_length_observation_rejected(registry):
    with pytest.raises(MalformedSignatureError):
        registry.best_match(np.ones(5) / 5)


def test_frozen_registry_rejects_mutation(registry):
    with pytest.raises(OntologyError):
        registry.add_category(SoundCategory(id="natural.frogs", path=["Natural", "Frogs"]))
    with pytest.raises(OntologyError):
        registry.register_template("natural.birds", make_signature([4220], 0.2, CENTERS), "repeating", 60.0)


def test_register_template_fresh_id():
    reg = load_builtin_ontology(freeze=False)
    tid = reg.register_template("natural.birds", make_signature([2425], 0.2, CENTERS), "repeating", 60.0)
    assert tid == "birds_1"
    assert reg.get_template(tid).category == "natural.birds"
    assert reg.register_template("natural.birds", make_signature([1390, 5570], 0.2, CENTERS), "repeating", 60.0) == "birds_2"


def test_register_template_errors():
    reg = load_builtin_ontology(freeze=False)
    with pytest.raises(UnknownCategoryError):
        reg.register_template("natural.frogs", make_signature([800], 0.2, CENTERS), "sustained", 60.0)
    with pytest.raises(MalformedSignatureError):
        reg.register_template("natural.birds", [0.5] * reg.channels, "sustained", 60.0)
    with pytest.raises(OntologyError):
        reg.register_template("natural.birds", make_signature([800], 0.2, CENTERS), "sustained", 60.0, template_id="bird_call")


def test_remove_category_takes_its_templates():
    reg = load_builtin_ontology(freeze=False)
    assert reg.remove_category("natural.mammals.dog") == 2
    assert not reg.has_template("dog_growl")
    assert "natural.mammals.dog" not in reg
    with pytest.raises(OntologyError):
        reg.remove_category(UNKNOWN_ID)
    with pytest.raises(UnknownCategoryError):
        reg.remove_category("natural.mammals.dog")


def test_lookups(registry):
    assert registry.is_under("human.speech", SPEECH_PATH)
    assert registry.is_under("mechanical.alarms", ALARM_PATH)
    assert not registry.is_under("natural.birds", ALARM_PATH)
    assert registry.find_by_path(["Mechanical", "Alarms"]).id == "mechanical.alarms"
    assert registry.find_by_path(["Mechanical", "Sirens"]) is None
    with pytest.raises(UnknownCategoryError):
        registry.get_category("natural.frogs")
    with pytest.raises(NotFoundError):
        registry.get_template("kazoo")


def test_category_root_is_checked():
    with pytest.raises(ValidationError):
        SoundCategory(id="x", path=["Imaginary", "Thing"])
    assert SoundCategory(id="natural.birds", path=["Natural", "Birds"]).label == "Natural/Birds"


def test_dump_and_load(registry):
    restored = load_ontology(dump_ontology(registry))
    assert sorted(t.id for t in restored.templates) == sorted(t.id for t in registry.templates)
    match = restored.best_match(registry.template_vector("fire_alarm"), "sustained")
    assert match.template.id == "fire_alarm"


@pytest.mark.parametrize("text", ["not json", "[1, 2]", '{"categories": []}'])
def test_load_rejects_bad_documents(text):
    with pytest.raises(OntologyError):
        load_ontology(text)


@given(st.lists(st.floats(min_value=120.0, max_value=7000.0), min_size=1, max_size=4))
def test_made_signatures_are_valid(centers_hz):
    sig = make_signature(centers_hz, 0.2, CENTERS)
    check_signature(sig, len(CENTERS))
    assert np.all(sig >= 0)


@given(st.floats(min_value=0.8, max_value=1.25))
def test_shift_moves_centroid(ratio):
    sig = make_signature([1055], 0.2, CENTERS)
    shifted = shift_signature(sig, ratio, CENTERS)
    assert shifted.sum() == pytest.approx(1.0)
    base = spectral_centroid(sig, CENTERS)
    # band sits mid-grid, so nothing falls off the edges
    assert spectral_centroid(shifted, CENTERS) == pytest.approx(base * ratio, rel=1e-2)


def test_shift_rejects_nonpositive_ratio():
    with pytest.raises(ValueError):
        shift_signature(make_signature([1055], 0.2, CENTERS), 0.0, CENTERS)
