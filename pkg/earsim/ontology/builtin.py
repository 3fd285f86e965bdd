"""Builtin sound ontology: the taxonomy rows plus a small template library."""

from typing import Dict, List, Optional, Tuple

from ..config import EarConfig, OntologyConfig
from .models import SoundCategory
from .registry import OntologyRegistry
from .signatures import make_signature

# (id, path, feature slots)
CATEGORY_ROWS: List[Tuple[str, List[str], List[str]]] = [
    # Natural
    ("natural.mammals", ["Natural", "Mammals"], []),
    ("natural.mammals.dog", ["Natural", "Mammals", "Dog"], ["type of sound (bark, growl)"]),
    ("natural.mammals.horse", ["Natural", "Mammals", "Horse"], []),
    ("natural.birds", ["Natural", "Birds"], ["type (e.g., woodpecker)", "action (flapping wings, call)"]),
    ("natural.insects", ["Natural", "Insects"], ["type"]),
    ("natural.leaves_wind", ["Natural", "Leaves-Wind"], []),
    ("natural.fluid", ["Natural", "Fluid"], ["fluid (dripping, droplets, flushing)"]),
    ("natural.water", ["Natural", "Water"], []),
    ("natural.fire", ["Natural", "Fire"], ["weather (snow, rain, thunder)"]),
    ("natural.rocks", ["Natural", "Rocks"], []),
    # Human made
    ("human.speech", ["HumanMade", "Speech"], ["speaker", "volume", "gender", "emotional tone", "words"]),
    ("human.singing", ["HumanMade", "Singing"], []),
    ("human.whistling", ["HumanMade", "Whistling"], []),
    ("human.retching_spitting", ["HumanMade", "Retching-Spitting"], []),
    ("human.vocal_distress", ["HumanMade", "Vocal-Distress"], ["kind (gasping, yelling, whimpering, moaning)"]),
    ("human.breathing", ["HumanMade", "Breathing"], ["kind (breathing, blowing nose, sneezing, coughing)"]),
    ("human.footsteps", ["HumanMade", "Footsteps"], ["terrain"]),
    ("human.getting_hit", ["HumanMade", "Getting-Hit"], ["instrument (e.g., with a stick)"]),
    ("human.heartbeat", ["HumanMade", "Heartbeat"], []),
    # Mechanical
    ("mechanical.alarms", ["Mechanical", "Alarms"], ["alarm type"]),
    ("mechanical.tapping", ["Mechanical", "Tapping"], ["pace", "material tapped"]),
    ("mechanical.clicks", ["Mechanical", "Clicks"], ["kind (click, dong, ding)"]),
    ("mechanical.creaking", ["Mechanical", "Creaking"], ["object (chair, fence)"]),
    ("mechanical.dragging", ["Mechanical", "Dragging"], []),
    ("mechanical.gunfire", ["Mechanical", "Gunfire"], ["distance", "caliber", "rate-of-fire", "direction"]),
    ("mechanical.grenade", ["Mechanical", "Grenade"], []),
    ("mechanical.gear_rustling", ["Mechanical", "Gear-Rustling"], []),
    ("mechanical.magazine_changes", ["Mechanical", "Magazine-Changes"], []),
    ("mechanical.vehicles", ["Mechanical", "Vehicles"], ["speed", "direction", "distance", "horn", "type of vehicle"]),
    ("mechanical.explosions", ["Mechanical", "Explosions"], ["size", "distance", "direction"]),
    # Miscellaneous
    ("miscellaneous.sha", ["Miscellaneous", "Sha"], []),
    ("miscellaneous.music", ["Miscellaneous", "Music"], ["standard features"]),
]

SPEECH_PATH = ["HumanMade", "Speech"]
ALARM_PATH = ["Mechanical", "Alarms"]

# Band centers sit on a 0.4-octave grid (115 Hz .. 7350 Hz). Two-band templates
# never share both bands and single-band templates own their band, which keeps
# every pair below the match threshold.
BAND_WIDTH_OCT = 0.2

# (template id, category id, band centers Hz, envelope, nominal level dB @ 1 m, modifiers)
TEMPLATE_ROWS: List[Tuple[str, str, List[float], str, float, Dict[str, str]]] = [
    ("heartbeat", "human.heartbeat", [115], "repeating", 40.0, {}),
    ("dog_growl", "natural.mammals.dog", [150, 265], "sustained", 70.0, {"type of sound": "growl"}),
    ("speech_male", "human.speech", [200, 460], "sustained", 65.0, {"gender": "male"}),
    ("dog_bark", "natural.mammals.dog", [605, 1840], "impulsive", 85.0, {"type of sound": "bark"}),
    ("horse_neigh", "natural.mammals.horse", [350, 2425], "sustained", 90.0, {}),
    ("footsteps_grass", "human.footsteps", [265, 3200], "repeating", 55.0, {"terrain": "grass"}),
    ("footsteps_gravel", "human.footsteps", [460, 5570], "repeating", 60.0, {"terrain": "gravel"}),
    ("speech_female", "human.speech", [1840, 3200], "sustained", 65.0, {"gender": "female"}),
    ("pump_alarm", "mechanical.alarms", [800, 2425], "sustained", 90.0, {"alarm type": "pump"}),
    ("fire_alarm", "mechanical.alarms", [3200, 5570], "sustained", 95.0, {"alarm type": "fire"}),
    ("pressure_alarm", "mechanical.alarms", [605, 5570], "sustained", 90.0, {"alarm type": "pressure"}),
    ("vehicle_engine", "mechanical.vehicles", [150, 800], "sustained", 85.0, {"type of vehicle": "car"}),
    ("music", "miscellaneous.music", [350, 3200], "sustained", 70.0, {}),
    ("tapping", "mechanical.tapping", [460, 1840], "repeating", 50.0, {"material tapped": "wood"}),
    ("door_ding", "mechanical.clicks", [2425, 5570], "impulsive", 60.0, {"kind": "ding"}),
    ("gunfire", "mechanical.gunfire", [200, 800], "impulsive", 140.0, {}),
    ("whistling", "human.whistling", [1390], "sustained", 70.0, {}),
    ("dripping", "natural.fluid", [1055], "repeating", 45.0, {"fluid": "dripping"}),
    ("bird_call", "natural.birds", [4220], "repeating", 70.0, {"action": "call"}),
    ("insects", "natural.insects", [7350], "sustained", 45.0, {}),
]


def load_builtin_ontology(
    ear: Optional[EarConfig] = None,
    ontology: Optional[OntologyConfig] = None,
    freeze: bool = True,
) -> OntologyRegistry:
    """Registry with every taxonomy row, Unknown, and the builtin templates."""
    ear = ear or EarConfig()
    ontology = ontology or OntologyConfig()
    registry = OntologyRegistry(
        channels=ear.channels,
        match_threshold=ontology.match_threshold,
        envelope_mismatch=ontology.envelope_mismatch,
    )
    for cid, path, slots in CATEGORY_ROWS:
        registry.add_category(SoundCategory(id=cid, path=path, feature_slots=slots))
    centers = ear.channel_centers
    for tid, cid, bands, envelope, level, modifiers in TEMPLATE_ROWS:
        registry.register_template(
            cid,
            make_signature(bands, BAND_WIDTH_OCT, centers),
            envelope,
            level,
            modifiers,
            template_id=tid,
        )
    return registry.freeze() if freeze else registry
