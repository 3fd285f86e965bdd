"""Engine configuration: typed settings, .env loading and logging setup."""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError

# Load .env from project root (parent of earsim/)
load_dotenv(Path(__file__).resolve().parent.parent / ".env")

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EarConfig(_Section):
    """Ear geometry, filterbank layout and dynamic-range gate."""

    head_radius: float = Field(0.0875, gt=0)
    speed_of_sound: float = Field(343.0, gt=0)
    sensitivity_preset: Literal["normal", "aged", "damaged", "custom"] = "normal"
    custom_offsets: Optional[List[float]] = None
    # damaged preset: notch placed on this channel
    notch_channel: int = 20
    notch_depth_db: float = 40.0
    aged_knee_hz: float = 1000.0
    aged_max_loss_db: float = 30.0
    front_emphasis_db: float = 3.0
    front_sector_deg: float = 60.0
    min_gate_db: float = 10.0
    max_gate_db: float = 130.0
    channels: int = 32
    low_hz: float = 100.0
    high_hz: float = 8000.0
    # head-shadow ILD scale at the lowest and highest channel
    ild_low_db: float = 1.0
    ild_high_db: float = 20.0

    @model_validator(mode="after")
    def _check(self) -> "EarConfig":
        if self.min_gate_db >= self.max_gate_db:
            raise ValueError("min_gate_db must be below max_gate_db")
        if self.channels < 8:
            raise ValueError("channels must be >= 8")
        if not 0 < self.low_hz < self.high_hz:
            raise ValueError("channel range must satisfy 0 < low_hz < high_hz")
        if self.sensitivity_preset == "custom":
            if self.custom_offsets is None or len(self.custom_offsets) != self.channels:
                raise ValueError("custom preset needs one offset per channel")
        if not 0 <= self.notch_channel < self.channels:
            raise ValueError("notch_channel out of range")
        return self

    @property
    def channel_centers(self) -> np.ndarray:
        return np.geomspace(self.low_hz, self.high_hz, self.channels)

    @property
    def max_itd(self) -> float:
        return self.head_radius / self.speed_of_sound * (np.pi / 2 + 1)


class OntologyConfig(_Section):
    match_threshold: float = Field(0.75, ge=0, le=1)
    envelope_mismatch: float = Field(0.8, ge=0, le=1)


class LocalizationConfig(_Section):
    sigma_front_deg: float = Field(2.0, ge=0)
    sigma_side_deg: float = Field(20.0, ge=0)
    front_limit_deg: float = 30.0
    side_limit_deg: float = 90.0
    # smallest head turn that can disambiguate front from back
    min_turn_deg: float = 5.0


class SegregationConfig(_Section):
    window_min_frames: int = 3
    cell_threshold_db: float = 6.0
    max_clusters: int = Field(5, ge=1)
    silhouette_min: float = 0.5
    separation_min: float = 1.0
    azimuth_scale_deg: float = 25.0
    octave_scale: float = 6.0
    onset_weight: float = 0.3
    min_cluster_cells: int = 2
    # a cluster narrower than this is folded into its nearest neighbour
    min_cluster_channels: int = Field(2, ge=1)
    expiry_s: float = 1.0
    gate_azimuth_deg: float = 25.0
    gate_signature: float = 0.4
    doppler_gate_gain: float = 4.0
    intelligibility_margin_db: float = 6.0
    min_doppler_updates: int = 5
    impulsive_max_s: float = 0.3


class AttentionConfig(_Section):
    capacity: int = Field(32, ge=1)
    short_term_half_life_s: float = Field(300.0, gt=0)
    long_term_half_life_s: float = Field(3600.0, gt=0)
    decay_coupling: Literal["independent", "base_activation"] = "independent"
    theta: float = 0.3
    slope: float = Field(0.1, gt=0)
    base_latency_s: float = 0.2
    latency_gain_s: float = 0.8
    exogenous_threshold_db: float = 60.0
    turn_rate_deg_s: float = Field(200.0, gt=0)


class AlarmConfig(_Section):
    own_station: Optional[str] = None
    station_min_loudness_db: float = 0.0
    consolidation_window_s: float = 2.0
    rate_cap_per_min: int = 30
    soft_watermark_per_min: int = 15
    rate_window_s: float = 60.0
    # a held alarm stream that falls silent this long is admitted again when it sounds
    rearm_silence_s: float = Field(0.3, gt=0)


class ProtocolConfig(_Section):
    listen: str = "127.0.0.1:7411"
    http: Optional[str] = None


class EngineConfig(_Section):
    """Top-level configuration for one ear instance."""

    seed: int = 0
    super_ear: bool = False
    window_frames: int = Field(4, ge=3)
    clock_mode: Literal["fast", "realtime"] = "fast"
    ear: EarConfig = Field(default_factory=EarConfig)
    ontology: OntologyConfig = Field(default_factory=OntologyConfig)
    localization: LocalizationConfig = Field(default_factory=LocalizationConfig)
    segregation: SegregationConfig = Field(default_factory=SegregationConfig)
    attention: AttentionConfig = Field(default_factory=AttentionConfig)
    alarms: AlarmConfig = Field(default_factory=AlarmConfig)
    protocol: ProtocolConfig = Field(default_factory=ProtocolConfig)


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``overrides`` into a copy of ``base``."""
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _env_overrides() -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    if os.getenv("EARSIM_SEED", "").strip():
        try:
            out["seed"] = int(os.getenv("EARSIM_SEED"))
        except ValueError as e:
            raise ConfigError(f"EARSIM_SEED is not an integer: {e}")
    if os.getenv("EARSIM_SUPER_EAR", "").strip():
        out["super_ear"] = os.getenv("EARSIM_SUPER_EAR", "false").lower() == "true"
    if os.getenv("EARSIM_EAR_PRESET", "").strip():
        out.setdefault("ear", {})["sensitivity_preset"] = os.getenv("EARSIM_EAR_PRESET").strip()
    if os.getenv("EARSIM_OWN_STATION", "").strip():
        out.setdefault("alarms", {})["own_station"] = os.getenv("EARSIM_OWN_STATION").strip()
    if os.getenv("EARSIM_LISTEN", "").strip():
        out.setdefault("protocol", {})["listen"] = os.getenv("EARSIM_LISTEN").strip()
    if os.getenv("EARSIM_HTTP", "").strip():
        out.setdefault("protocol", {})["http"] = os.getenv("EARSIM_HTTP").strip()
    return out


def load_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    use_env: bool = True,
) -> EngineConfig:
    """Build an EngineConfig from an optional JSON file, explicit overrides and the environment.

    Precedence (lowest first): defaults, file, ``overrides``, environment.
    """
    data: Dict[str, Any] = {}
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold an object")
    if overrides:
        data = deep_merge(data, overrides)
    if use_env:
        data = deep_merge(data, _env_overrides())
    try:
        config = EngineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}")
    logger.debug("[Config] seed=%s super_ear=%s preset=%s", config.seed, config.super_ear, config.ear.sensitivity_preset)
    return config


def setup_logging(level: Optional[str] = None) -> None:
    """Install a single stream handler; level from EARSIM_LOG_LEVEL unless given."""
    name = (level or os.getenv("EARSIM_LOG_LEVEL", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.WARNING),
        format="%(asctime)s %(levelname)s %(message)s",
        force=True,
    )
