"""Spherical-head interaural cue models (ITD and ILD) and their inverses."""

from typing import Union

import numpy as np
from scipy.optimize import brentq

from ..config import EarConfig

ArrayLike = Union[float, np.ndarray]


def _fold_front(azimuth_deg: float) -> float:
    """|azimuth| folded into [0, 90]: rear angles mirror onto the front."""
    a = abs(((azimuth_deg + 180.0) % 360.0) - 180.0)
    return 180.0 - a if a > 90.0 else a


def itd_model(relative_azimuth: float, config: EarConfig) -> float:
    """Woodworth ITD in seconds; positive means the right ear leads."""
    theta = np.radians(_fold_front(relative_azimuth))
    magnitude = config.head_radius / config.speed_of_sound * (theta + np.sin(theta))
    side = np.sign(np.sin(np.radians(relative_azimuth)))
    return float(side * magnitude)


def ild_scale(channel_center: ArrayLike, config: EarConfig) -> ArrayLike:
    """Head-shadow scale k(f) in dB, log-interpolated between the band edges."""
    frac = np.log(np.asarray(channel_center, dtype=float) / config.low_hz) / np.log(config.high_hz / config.low_hz)
    frac = np.clip(frac, 0.0, 1.0)
    return config.ild_low_db + (config.ild_high_db - config.ild_low_db) * frac


def ild_model(relative_azimuth: float, channel_center: ArrayLike, config: EarConfig) -> ArrayLike:
    """ILD in dB (right minus left) = k(f) * sin(azimuth)."""
    out = ild_scale(channel_center, config) * np.sin(np.radians(relative_azimuth))
    return float(out) if np.ndim(out) == 0 else out


def invert_itd(itd: float, config: EarConfig) -> float:
    """|azimuth| in [0, 90] degrees whose Woodworth ITD equals |itd| (clamped to the bound)."""
    bound = config.max_itd
    target = min(abs(itd), bound)
    if target <= 0.0:
        return 0.0
    if target >= bound:
        return 90.0
    scale = config.head_radius / config.speed_of_sound
    theta = brentq(lambda th: scale * (th + np.sin(th)) - target, 0.0, np.pi / 2, xtol=1e-12)
    return float(np.degrees(theta))


def ild_azimuth_proxy(ild_db: ArrayLike, channel_center: ArrayLike, config: EarConfig) -> ArrayLike:
    """Front-hemisphere azimuth (deg) implied by an ILD at a channel."""
    ratio = np.clip(np.asarray(ild_db, dtype=float) / ild_scale(channel_center, config), -1.0, 1.0)
    return np.degrees(np.arcsin(ratio))
