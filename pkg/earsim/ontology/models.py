"""Ontology data types: sound categories and matchable templates."""

from typing import Dict, List, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

ROOTS = ("Natural", "HumanMade", "Mechanical", "Miscellaneous")
UNKNOWN_ID = "unknown"

Envelope = Literal["impulsive", "sustained", "periodic", "repeating"]


class SoundCategory(BaseModel):
    """A node of the sound taxonomy, e.g. Natural/Mammals/Dog."""

    model_config = ConfigDict(frozen=True)

    id: str
    path: List[str]
    feature_slots: List[str] = Field(default_factory=list)

    @field_validator("path")
    @classmethod
    def _root(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("category path must be non-empty")
        if v[0] not in ROOTS:
            raise ValueError(f"category root must be one of {ROOTS}, got {v[0]!r}")
        return v

    def is_under(self, prefix: List[str]) -> bool:
        return self.path[: len(prefix)] == list(prefix)

    @property
    def label(self) -> str:
        return "/".join(self.path)


class SoundTemplate(BaseModel):
    """A matchable sound: spectral signature, envelope and nominal level."""

    model_config = ConfigDict(frozen=True)

    id: str
    category: str
    spectral_signature: List[float]
    envelope: Envelope
    nominal_level: float
    modifiers: Dict[str, str] = Field(default_factory=dict)
