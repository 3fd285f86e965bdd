import json
from typing import Any, Dict, List, Optional

import numpy as np
import pytest
from hypothesis import settings

from earsim.config import EarConfig, EngineConfig
from earsim.ontology import load_builtin_ontology
from earsim.scene import AuditoryScene, parse_scene

settings.register_profile("fast", max_examples=25, deadline=None)
settings.load_profile("fast")


def source_doc(
    sid: str,
    template: str,
    azimuth: float = 0.0,
    distance: float = 2.0,
    onset: float = 0.0,
    duration: float = 2.0,
    level: Optional[float] = None,
    **extra: Any,
) -> Dict[str, Any]:
    """A static source document; ``level`` defaults to 70 dB at 1 m."""
    doc = {
        "id": sid,
        "template": template,
        "onset_s": onset,
        "duration_s": duration,
        "level_db_at_1m": 70.0 if level is None else level,
        "trajectory": [{"t_s": 0.0, "azimuth_deg": azimuth, "distance_m": distance}],
    }
    doc.update(extra)
    return doc


def scene_doc(sources: List[Dict[str, Any]], duration: float = 3.0, **extra: Any) -> Dict[str, Any]:
    doc = {"duration_s": duration, "background_db": 20.0, "frame_hop_s": 0.05, "sources": sources}
    doc.update(extra)
    return doc


def make_scene(sources: List[Dict[str, Any]], duration: float = 3.0, **extra: Any) -> AuditoryScene:
    return parse_scene(json.dumps(scene_doc(sources, duration, **extra)))


@pytest.fixture(scope="session")
def ear() -> EarConfig:
    return EarConfig()


@pytest.fixture(scope="session")
def registry():
    return load_builtin_ontology()


@pytest.fixture
def config() -> EngineConfig:
    return EngineConfig(seed=7)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def growl_scene() -> AuditoryScene:
    return make_scene([source_doc("dog", "dog_growl", azimuth=-60.0, distance=3.0, onset=0.2, duration=2.0)])
