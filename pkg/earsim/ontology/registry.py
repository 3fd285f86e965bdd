"""Sound ontology registry: categories, templates and nearest-template classification."""

import json
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import MalformedSignatureError, NotFoundError, OntologyError, UnknownCategoryError
from .models import UNKNOWN_ID, SoundCategory, SoundTemplate
from .signatures import check_signature, cosine_similarity

logger = logging.getLogger(__name__)

UNKNOWN_CATEGORY = SoundCategory(id=UNKNOWN_ID, path=["Miscellaneous", "Unknown"])


class TemplateMatch:
    """Best template for an observed signature (template is None for Unknown)."""

    __slots__ = ("category_id", "confidence", "template")

    def __init__(self, category_id: str, confidence: float, template: Optional[SoundTemplate]):
        self.category_id = category_id
        self.confidence = confidence
        self.template = template

    def __iter__(self):
        yield self.category_id
        yield self.confidence

    def __repr__(self) -> str:
        tid = self.template.id if self.template else None
        return f"TemplateMatch({self.category_id!r}, {self.confidence:.3f}, template={tid!r})"


class OntologyRegistry:
    """Categories plus matchable templates; Unknown is always present.

    Mutation is for the setup phase only. Call ``freeze()`` before handing the
    registry to the engine; afterwards every mutator raises OntologyError.
    """

    def __init__(
        self,
        channels: int,
        match_threshold: float = 0.75,
        envelope_mismatch: float = 0.8,
    ):
        self.channels = channels
        self.match_threshold = match_threshold
        self.envelope_mismatch = envelope_mismatch
        self._categories: Dict[str, SoundCategory] = {UNKNOWN_ID: UNKNOWN_CATEGORY}
        self._templates: Dict[str, SoundTemplate] = {}
        self._vectors: Dict[str, np.ndarray] = {}
        self._frozen = False

    # --- build phase -------------------------------------------------------

    def freeze(self) -> "OntologyRegistry":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _check_mutable(self) -> None:
        if self._frozen:
            raise OntologyError("registry is frozen")

    def add_category(self, category: SoundCategory) -> str:
        self._check_mutable()
        if category.id in self._categories:
            raise OntologyError(f"duplicate category id {category.id!r}")
        self._categories[category.id] = category
        return category.id

    def register_template(
        self,
        category_id: str,
        signature: Sequence[float],
        envelope: str,
        nominal_level: float,
        modifiers: Optional[Dict[str, str]] = None,
        template_id: Optional[str] = None,
    ) -> str:
        """Add a template under an existing category and return its id."""
        self._check_mutable()
        if category_id not in self._categories:
            raise UnknownCategoryError(f"unknown category {category_id!r}")
        sig = check_signature(signature, self.channels)
        if not np.isfinite(nominal_level):
            raise MalformedSignatureError("nominal_level must be finite")
        tid = template_id or self._fresh_template_id(category_id)
        if tid in self._templates:
            raise OntologyError(f"duplicate template id {tid!r}")
        template = SoundTemplate(
            id=tid,
            category=category_id,
            spectral_signature=[float(x) for x in sig],
            envelope=envelope,
            nominal_level=float(nominal_level),
            modifiers=dict(modifiers or {}),
        )
        self._templates[tid] = template
        self._vectors[tid] = sig
        logger.debug("[Ontology] registered template %s under %s", tid, category_id)
        return tid

    def _fresh_template_id(self, category_id: str) -> str:
        stem = category_id.rsplit(".", 1)[-1]
        n = 1
        while f"{stem}_{n}" in self._templates:
            n += 1
        return f"{stem}_{n}"

    def remove_category(self, category_id: str) -> int:
        """Remove a category and its templates; returns how many templates went with it."""
        self._check_mutable()
        if category_id == UNKNOWN_ID:
            raise OntologyError("the Unknown category cannot be removed")
        if category_id not in self._categories:
            raise UnknownCategoryError(f"unknown category {category_id!r}")
        del self._categories[category_id]
        doomed = [tid for tid, t in self._templates.items() if t.category == category_id]
        for tid in doomed:
            del self._templates[tid]
            del self._vectors[tid]
        return len(doomed)

    # --- lookups -----------------------------------------------------------

    def __contains__(self, category_id: str) -> bool:
        return category_id in self._categories

    def __len__(self) -> int:
        return len(self._templates)

    @property
    def categories(self) -> List[SoundCategory]:
        return list(self._categories.values())

    @property
    def templates(self) -> List[SoundTemplate]:
        return list(self._templates.values())

    def get_category(self, category_id: str) -> SoundCategory:
        try:
            return self._categories[category_id]
        except KeyError:
            raise UnknownCategoryError(f"unknown category {category_id!r}")

    def get_template(self, template_id: str) -> SoundTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise NotFoundError(f"unknown template {template_id!r}")

    def has_template(self, template_id: str) -> bool:
        return template_id in self._templates

    def template_vector(self, template_id: str) -> np.ndarray:
        return self._vectors[template_id]

    def is_under(self, category_id: str, prefix: Sequence[str]) -> bool:
        cat = self._categories.get(category_id)
        return cat is not None and cat.is_under(list(prefix))

    def find_by_path(self, path: Sequence[str]) -> Optional[SoundCategory]:
        for cat in self._categories.values():
            if cat.path == list(path):
                return cat
        return None

    # --- matching ----------------------------------------------------------

    def best_match(self, observed_signature: Sequence[float], observed_envelope: Optional[str] = None) -> TemplateMatch:
        """Score every template by cosine x envelope agreement; below threshold -> Unknown."""
        obs = np.asarray(observed_signature, dtype=float)
        if obs.shape != (self.channels,):
            raise MalformedSignatureError(f"observed signature has {obs.size} entries, expected {self.channels}")
        if not self._templates or not np.all(np.isfinite(obs)):
            return TemplateMatch(UNKNOWN_ID, 0.0, None)
        best: Tuple[float, str] = (-1.0, "")
        # sorted ids make the strict ">" keep the lexicographically smallest on ties
        for tid in sorted(self._templates):
            score = cosine_similarity(obs, self._vectors[tid])
            if observed_envelope is not None and observed_envelope != self._templates[tid].envelope:
                score *= self.envelope_mismatch
            if score > best[0]:
                best = (score, tid)
        score, tid = best
        if score < self.match_threshold:
            return TemplateMatch(UNKNOWN_ID, 0.0, None)
        template = self._templates[tid]
        return TemplateMatch(template.category, float(min(max(score, 0.0), 1.0)), template)

    def classify(self, observed_signature: Sequence[float], observed_envelope: Optional[str] = None) -> Tuple[str, float]:
        match = self.best_match(observed_signature, observed_envelope)
        return match.category_id, match.confidence

    # --- persistence -------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            "channels": self.channels,
            "match_threshold": self.match_threshold,
            "envelope_mismatch": self.envelope_mismatch,
            "categories": [c.model_dump() for c in self._categories.values() if c.id != UNKNOWN_ID],
            "templates": [t.model_dump() for t in self._templates.values()],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "OntologyRegistry":
        try:
            reg = cls(
                channels=int(data["channels"]),
                match_threshold=float(data.get("match_threshold", 0.75)),
                envelope_mismatch=float(data.get("envelope_mismatch", 0.8)),
            )
            for c in data.get("categories", []):
                reg.add_category(SoundCategory.model_validate(c))
            for t in data.get("templates", []):
                reg.register_template(
                    t["category"],
                    t["spectral_signature"],
                    t["envelope"],
                    t["nominal_level"],
                    t.get("modifiers", {}),
                    template_id=t["id"],
                )
        except (KeyError, TypeError, ValueError) as e:
            raise OntologyError(f"malformed ontology document: {e}")
        return reg


def dump_ontology(registry: OntologyRegistry) -> str:
    return json.dumps(registry.to_dict(), indent=2)


def load_ontology(text: str) -> OntologyRegistry:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise OntologyError(f"ontology document is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise OntologyError("ontology document must hold an object")
    return OntologyRegistry.from_dict(data)
