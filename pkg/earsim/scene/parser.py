"""Scene documents: parse, validate, render back to text, resolve template ids."""

import json
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from ..config import EarConfig
from ..errors import SceneError, SceneSemanticError, SceneSyntaxError
from ..ontology import SPEECH_PATH, OntologyRegistry, SoundTemplate, load_builtin_ontology, make_signature
from .model import AuditoryScene, Violation

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def _builtin(channels: int, low_hz: float, high_hz: float) -> OntologyRegistry:
    return load_builtin_ontology(EarConfig(channels=channels, low_hz=low_hz, high_hz=high_hz))


def default_registry(ear: Optional[EarConfig] = None) -> OntologyRegistry:
    ear = ear or EarConfig()
    return _builtin(ear.channels, ear.low_hz, ear.high_hz)


def validate_scene(scene: AuditoryScene, registry: Optional[OntologyRegistry] = None) -> List[Violation]:
    """Every invariant violation in the scene; empty means valid."""
    registry = registry or default_registry()
    out: List[Violation] = []

    def bad(source_id: Optional[str], message: str) -> None:
        out.append(Violation(source_id=source_id, message=message))

    if not scene.duration_s > 0:
        bad(None, "duration_s must be > 0")
    if scene.sample_rate_hz < 8000:
        bad(None, "sample_rate_hz must be >= 8000")
    if not scene.frame_hop_s > 0:
        bad(None, "frame_hop_s must be > 0")
    if not math.isfinite(scene.background_db):
        bad(None, "background_db must be finite")

    local: Dict[str, str] = {}
    for tpl in scene.templates:
        if registry.has_template(tpl.id) or tpl.id in local:
            bad(None, f"scene template {tpl.id!r} collides with an existing template id")
        if tpl.category not in registry:
            bad(None, f"scene template {tpl.id!r} has unknown category {tpl.category!r}")
        if not tpl.centers_hz or any(c <= 0 for c in tpl.centers_hz) or tpl.width_oct <= 0:
            bad(None, f"scene template {tpl.id!r} needs positive centers_hz and width_oct")
        local[tpl.id] = tpl.category

    seen: Dict[str, int] = {}
    for i, src in enumerate(scene.sources):
        sid = src.id
        if sid in seen:
            bad(sid, f"duplicate source id {sid!r} (sources #{seen[sid]} and #{i})")
        else:
            seen[sid] = i

        if registry.has_template(src.template):
            category = registry.get_template(src.template).category
        elif src.template in local:
            category = local[src.template]
        else:
            category = None
            bad(sid, f"unknown template {src.template!r}")

        if src.onset_s < 0:
            bad(sid, "onset_s must be >= 0")
        if not src.duration_s > 0:
            bad(sid, "duration_s must be > 0")
        if not math.isfinite(src.level_db_at_1m):
            bad(sid, "level_db_at_1m must be finite")
        if src.repeat is None:
            if src.onset_s + src.duration_s > scene.duration_s + 1e-9:
                bad(sid, "onset_s + duration_s exceeds scene duration")
        elif src.repeat.period_s < src.duration_s:
            bad(sid, "repeat period_s must be >= duration_s")

        if not src.trajectory:
            bad(sid, "trajectory needs at least one keyframe")
        for a, b in zip(src.trajectory, src.trajectory[1:]):
            if b.t_s <= a.t_s:
                bad(sid, f"keyframe times not strictly increasing at t={b.t_s}")
        for k in src.trajectory:
            if k.distance_m <= 0:
                bad(sid, f"keyframe distance must be > 0 at t={k.t_s}")
            if not -180.0 <= k.azimuth_deg < 180.0:
                bad(sid, f"keyframe azimuth {k.azimuth_deg} outside [-180, 180)")

        if src.speech is not None:
            if category is not None and not registry.is_under(category, SPEECH_PATH):
                bad(sid, "speech on non-speech category")
            words = sorted(src.speech.words, key=lambda w: w.onset_s)
            for w in words:
                if w.onset_s < 0 or w.dur_s <= 0 or w.end_s > src.duration_s + 1e-9:
                    bad(sid, f"word {w.w!r} lies outside the source duration")
            for a, b in zip(words, words[1:]):
                if b.onset_s < a.end_s - 1e-9:
                    bad(sid, f"word tokens {a.w!r} and {b.w!r} overlap")
    return out


def parse_scene(text: str, registry: Optional[OntologyRegistry] = None) -> AuditoryScene:
    """Parse and validate a scene document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneSyntaxError(e.msg, line=e.lineno, column=e.colno)
    if not isinstance(data, dict):
        raise SceneSyntaxError("scene document must hold an object", line=1, column=1)
    try:
        scene = AuditoryScene.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first.get("loc", ())
        source_id = None
        if len(loc) >= 2 and loc[0] == "sources" and isinstance(loc[1], int):
            raw = data.get("sources") or []
            if loc[1] < len(raw) and isinstance(raw[loc[1]], dict):
                source_id = raw[loc[1]].get("id")
        where = ".".join(str(p) for p in loc)
        raise SceneSemanticError(f"{where}: {first.get('msg')}", source_id=source_id)
    violations = validate_scene(scene, registry)
    if violations:
        first = violations[0]
        raise SceneSemanticError(
            "; ".join(str(v) for v in violations),
            source_id=first.source_id,
            violations=violations,
        )
    return scene


def render_scene(scene: AuditoryScene) -> str:
    return json.dumps(scene.model_dump(mode="json"), indent=2)


def load_scene(path: str, registry: Optional[OntologyRegistry] = None) -> AuditoryScene:
    p = Path(path)
    if not p.exists():
        raise SceneError(f"scene file not found: {path}")
    logger.debug("[Scene] loading %s", p)
    return parse_scene(p.read_text(encoding="utf-8"), registry)


def resolve_templates(
    scene: AuditoryScene,
    ear: Optional[EarConfig] = None,
    registry: Optional[OntologyRegistry] = None,
) -> Dict[str, SoundTemplate]:
    """Template id -> template for every sound the scene can play.

    Ontology templates win; scene-local templates fill in the rest.
    """
    ear = ear or EarConfig()
    registry = registry or default_registry(ear)
    book = {t.id: t for t in registry.templates}
    centers = ear.channel_centers
    for tpl in scene.templates:
        if tpl.id in book:
            continue
        book[tpl.id] = SoundTemplate(
            id=tpl.id,
            category=tpl.category,
            spectral_signature=[float(x) for x in make_signature(tpl.centers_hz, tpl.width_oct, centers)],
            envelope=tpl.envelope,
            nominal_level=tpl.level_db_at_1m,
            modifiers=dict(tpl.modifiers),
        )
    return book
