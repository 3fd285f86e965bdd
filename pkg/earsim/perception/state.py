"""Shared perception types passed between pipeline nodes and on to attention."""

from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class LocalizationEstimate(BaseModel):
    """Azimuth (deg, relative to the head), its sigma, and a coarse distance."""

    azimuth: float
    azimuth_sigma: float
    distance: Optional[float] = None
    distance_confidence: Literal["coarse", "unknown"] = "unknown"
    front_back_resolved: bool = False


class Cluster(BaseModel):
    """One non-null cluster of (frame, channel) cells within a window."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: int
    cells: List[Tuple[int, int]]
    profile: np.ndarray
    azimuth_proxy: float
    itd: float
    ild: np.ndarray
    loudness_db: float
    onset: float
    t_last: float
    source_tag: Optional[str] = None


class SegregationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    labels: np.ndarray
    clusters: List[Cluster] = Field(default_factory=list)
    silhouette: Optional[float] = None


class CategoryGuess(BaseModel):
    id: str
    confidence: float


class WordMatch(BaseModel):
    w: str
    t: float


class SpeechFields(BaseModel):
    speaker_id: str
    sex: Literal["female", "male", "unspecified"] = "unspecified"
    delivery: Literal["normal", "whisper", "shout"] = "normal"
    words: List[WordMatch] = Field(default_factory=list)


class HeardObject(BaseModel):
    """What the ear reports to cognition about one perceived sound."""

    id: str
    stream_id: str
    t: float
    category: CategoryGuess
    template: Optional[str] = None
    azimuth: float
    azimuth_sigma: float
    front_back_resolved: bool = False
    distance: Optional[float] = None
    onset: float
    duration: float
    repetition: bool = False
    loudness: float
    centroid_hz: float
    doppler_ratio: float = 1.0
    speech: Optional[SpeechFields] = None
    modifiers: Dict[str, str] = Field(default_factory=dict)
    novelty: Literal["known_type", "new_type"] = "known_type"
    consolidation_count: int = Field(1, ge=1)
    station_tag: Optional[str] = None
    is_alarm_like: bool = False
    # peak channel, used to tell unknown alarm types apart
    peak_channel: int = 0


class WordTarget(BaseModel):
    """A loaded word as identification sees it."""

    w: str
    permanent: bool = False
