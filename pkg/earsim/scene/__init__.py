from .model import AuditoryScene, Keyframe, Repeat, SceneTemplate, SoundSource, SpeechPayload, Violation, WordToken
from .parser import default_registry, load_scene, parse_scene, render_scene, resolve_templates, validate_scene
from .state import (
    SourceState,
    active_sources,
    burst_start,
    level_at_distance,
    source_index,
    source_state_at,
    words_at,
    wrap_degrees,
)

__all__ = [
    "AuditoryScene",
    "Keyframe",
    "Repeat",
    "SceneTemplate",
    "SoundSource",
    "SourceState",
    "SpeechPayload",
    "Violation",
    "WordToken",
    "active_sources",
    "burst_start",
    "default_registry",
    "level_at_distance",
    "load_scene",
    "parse_scene",
    "render_scene",
    "resolve_templates",
    "source_index",
    "source_state_at",
    "validate_scene",
    "words_at",
    "wrap_degrees",
]
