"""Scene document model. Field names match the on-disk JSON keys exactly."""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..errors import UnknownSourceError


class _Doc(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Keyframe(_Doc):
    t_s: float
    azimuth_deg: float
    distance_m: float


class Repeat(_Doc):
    period_s: float


class WordToken(_Doc):
    w: str
    onset_s: float
    dur_s: float

    @property
    def end_s(self) -> float:
        return self.onset_s + self.dur_s


class SpeechPayload(_Doc):
    speaker_id: str
    sex: Literal["female", "male", "unspecified"] = "unspecified"
    delivery: Literal["normal", "whisper", "shout"] = "normal"
    words: List[WordToken] = Field(default_factory=list)


class SoundSource(_Doc):
    id: str
    template: str
    onset_s: float
    duration_s: float
    level_db_at_1m: float
    repeat: Optional[Repeat] = None
    trajectory: List[Keyframe]
    speech: Optional[SpeechPayload] = None
    is_alarm: bool = False
    station: Optional[str] = None


class SceneTemplate(_Doc):
    """A sound that exists in the world but not in the ear's ontology."""

    id: str
    category: str
    centers_hz: List[float]
    width_oct: float = 0.2
    envelope: Literal["impulsive", "sustained", "periodic", "repeating"] = "sustained"
    level_db_at_1m: float = 80.0
    modifiers: Dict[str, str] = Field(default_factory=dict)


class AuditoryScene(_Doc):
    duration_s: float
    background_db: float = 20.0
    sample_rate_hz: int = 16000
    frame_hop_s: float = 0.05
    sources: List[SoundSource] = Field(default_factory=list)
    templates: List[SceneTemplate] = Field(default_factory=list)

    def source(self, source_id: str) -> SoundSource:
        for s in self.sources:
            if s.id == source_id:
                return s
        raise UnknownSourceError(f"unknown source {source_id!r}")

    @property
    def frame_count(self) -> int:
        return int(round(self.duration_s / self.frame_hop_s))


class Violation(BaseModel):
    source_id: Optional[str] = None
    message: str

    def __str__(self) -> str:
        return f"{self.source_id}: {self.message}" if self.source_id else self.message
