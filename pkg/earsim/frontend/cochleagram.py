"""Feature-domain binaural renderer: scene -> per-ear channel energies + interaural cues.

Energies are in dB. Sources add in the power domain on top of a spectrally
flat background floor; each ear's channels are clamped to background + max_gate.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..config import EarConfig
from ..ontology import SoundTemplate, shift_signature
from ..scene import AuditoryScene, resolve_templates, source_state_at, wrap_degrees
from .binaural import ild_model, itd_model

logger = logging.getLogger(__name__)


class CochleagramFrame(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    t: float
    background_db: float
    left_energy: np.ndarray
    right_energy: np.ndarray
    # power-weighted ITD tag per channel (s); 0 where only background
    channel_itd: np.ndarray
    # dominant source per channel, None where the background dominates
    channel_source: List[Optional[str]]


class InterauralFeatures(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    t: float
    itd: float
    ild: np.ndarray
    summed_loudness: float


def db_to_power(db: np.ndarray) -> np.ndarray:
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def power_to_db(power: np.ndarray) -> np.ndarray:
    return 10.0 * np.log10(power)


def channel_centers(config: EarConfig) -> np.ndarray:
    return config.channel_centers


def preset_offsets(preset: str, config: EarConfig) -> np.ndarray:
    """Hearing loss in dB per channel (subtracted from the rendered energies)."""
    centers = config.channel_centers
    loss = np.zeros(config.channels)
    if preset == "normal":
        return loss
    if preset == "aged":
        # flat below the knee, rising linearly in log-frequency to the top channel
        above = centers > config.aged_knee_hz
        frac = np.log(centers[above] / config.aged_knee_hz) / np.log(config.high_hz / config.aged_knee_hz)
        loss[above] = config.aged_max_loss_db * np.clip(frac, 0.0, 1.0)
        return loss
    if preset == "damaged":
        loss[config.notch_channel] = config.notch_depth_db
        return loss
    if preset == "custom":
        return np.asarray(config.custom_offsets, dtype=float)
    raise ValueError(f"unknown sensitivity preset {preset!r}")


def _render(
    scene: AuditoryScene,
    config: EarConfig,
    head_heading: float,
    t: float,
    templates: Mapping[str, SoundTemplate],
) -> Tuple[CochleagramFrame, InterauralFeatures]:
    centers = config.channel_centers
    n = config.channels
    bg = scene.background_db
    bg_power = float(db_to_power(bg))
    left = np.full(n, bg_power)
    right = np.full(n, bg_power)
    itd_weighted = np.zeros(n)
    best_power = np.full(n, bg_power)
    best_source: List[Optional[str]] = [None] * n
    itd_sum = 0.0
    weight_sum = 0.0

    for src in scene.sources:
        state = source_state_at(scene, src.id, t)
        if not state.active or state.level_at_ear - bg < config.min_gate_db:
            continue
        sig = np.asarray(templates[src.template].spectral_signature, dtype=float)
        if state.radial_velocity != 0.0:
            ratio = config.speed_of_sound / (config.speed_of_sound + state.radial_velocity)
            sig = shift_signature(sig, ratio, centers)
        peak = sig.max()
        if peak <= 0:
            continue
        with np.errstate(divide="ignore"):
            spectrum = state.level_at_ear + 10.0 * np.log10(sig / peak)
        relative = wrap_degrees(state.azimuth - head_heading)
        if abs(relative) <= config.front_sector_deg:
            spectrum = spectrum + config.front_emphasis_db
        half_ild = 0.5 * ild_model(relative, centers, config)
        p_left = db_to_power(spectrum - half_ild)
        p_right = db_to_power(spectrum + half_ild)
        itd = itd_model(relative, config)
        both = p_left + p_right
        left += p_left
        right += p_right
        itd_weighted += itd * both
        louder = both / 2.0 > best_power
        best_power = np.where(louder, both / 2.0, best_power)
        for ch in np.flatnonzero(louder):
            best_source[ch] = src.id
        total = float(both.sum())
        itd_sum += itd * total
        weight_sum += total

    ceiling = bg + config.max_gate_db
    left_db = np.minimum(power_to_db(left), ceiling)
    right_db = np.minimum(power_to_db(right), ceiling)
    source_power = left + right - 2.0 * bg_power
    channel_itd = np.divide(itd_weighted, source_power, out=np.zeros(n), where=source_power > 0)

    frame = CochleagramFrame(
        t=t,
        background_db=bg,
        left_energy=left_db,
        right_energy=right_db,
        channel_itd=channel_itd,
        channel_source=best_source,
    )
    features = InterauralFeatures(
        t=t,
        itd=itd_sum / weight_sum if weight_sum > 0 else 0.0,
        ild=right_db - left_db,
        summed_loudness=summed_loudness(left_db, right_db, bg),
    )
    return frame, features


def summed_loudness(left_db: np.ndarray, right_db: np.ndarray, background_db: float) -> float:
    """dB of the summed above-background power (both ears averaged), relative to the background."""
    bg_power = float(db_to_power(background_db))
    excess = 0.5 * (db_to_power(left_db) + db_to_power(right_db)) - bg_power
    total = float(np.clip(excess, 0.0, None).sum())
    if total <= 0:
        return 0.0
    return max(float(power_to_db(total)) - background_db, 0.0)


def _templates_for(scene: AuditoryScene, config: EarConfig, templates: Optional[Mapping[str, SoundTemplate]]):
    return templates if templates is not None else resolve_templates(scene, config)


def render_frame(
    scene: AuditoryScene,
    config: EarConfig,
    head_heading: float,
    t: float,
    templates: Optional[Mapping[str, SoundTemplate]] = None,
) -> CochleagramFrame:
    return _render(scene, config, head_heading, t, _templates_for(scene, config, templates))[0]


def interaural_features(
    scene: AuditoryScene,
    config: EarConfig,
    head_heading: float,
    t: float,
    templates: Optional[Mapping[str, SoundTemplate]] = None,
) -> InterauralFeatures:
    return _render(scene, config, head_heading, t, _templates_for(scene, config, templates))[1]


def apply_sensitivity(frame: CochleagramFrame, config: EarConfig) -> CochleagramFrame:
    """Subtract the preset's per-channel loss, flooring at the background level."""
    loss = preset_offsets(config.sensitivity_preset, config)
    if not np.any(loss):
        return frame
    floor = frame.background_db
    return frame.model_copy(
        update={
            "left_energy": np.maximum(frame.left_energy - loss, floor),
            "right_energy": np.maximum(frame.right_energy - loss, floor),
        }
    )


def render_window(
    scene: AuditoryScene,
    config: EarConfig,
    headings: Sequence[float],
    times: Sequence[float],
    templates: Optional[Mapping[str, SoundTemplate]] = None,
) -> List[Tuple[CochleagramFrame, InterauralFeatures]]:
    """Render consecutive frames through the ear's sensitivity curve."""
    book = _templates_for(scene, config, templates)
    out = []
    for heading, t in zip(headings, times):
        frame, features = _render(scene, config, heading, t, book)
        heard = apply_sensitivity(frame, config)
        if heard is not frame:
            features = features.model_copy(
                update={
                    "ild": heard.right_energy - heard.left_energy,
                    "summed_loudness": summed_loudness(heard.left_energy, heard.right_energy, heard.background_db),
                }
            )
        out.append((heard, features))
    return out


def dump_frames(frames: Sequence[CochleagramFrame], path: str) -> int:
    """Write ``t,ear,ch0..chN-1`` rows, one per ear per frame. Returns rows written."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    rows = 0
    with open(p, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        if frames:
            writer.writerow(["t", "ear"] + [f"ch{i}" for i in range(len(frames[0].left_energy))])
        for frame in frames:
            writer.writerow([f"{frame.t:.4f}", "left"] + [f"{v:.3f}" for v in frame.left_energy])
            writer.writerow([f"{frame.t:.4f}", "right"] + [f"{v:.3f}" for v in frame.right_energy])
            rows += 2
    logger.info("[Frontend] wrote %d frame rows to %s", rows, p)
    return rows
