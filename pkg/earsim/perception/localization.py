"""Localization: azimuth from ITD with human-sized error, distance from level, front/back by head turns."""

import logging
import math
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import EarConfig, LocalizationConfig
from ..frontend import InterauralFeatures, invert_itd
from ..scene import wrap_degrees
from .state import LocalizationEstimate

logger = logging.getLogger(__name__)

RngLike = Union[int, np.random.Generator, None]


def sector_sigma(azimuth: float, config: Optional[LocalizationConfig] = None) -> float:
    """Error sigma (deg): sigma_front inside the front limit, linear up to sigma_side at the side limit."""
    config = config or LocalizationConfig()
    a = abs(wrap_degrees(azimuth))
    if a <= config.front_limit_deg:
        return config.sigma_front_deg
    if a >= config.side_limit_deg:
        return config.sigma_side_deg
    frac = (a - config.front_limit_deg) / (config.side_limit_deg - config.front_limit_deg)
    return config.sigma_front_deg + frac * (config.sigma_side_deg - config.sigma_front_deg)


def _rng(rng: RngLike) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def localize(
    features: InterauralFeatures,
    ear: EarConfig,
    config: Optional[LocalizationConfig] = None,
    rng: RngLike = None,
    super_ear: bool = False,
) -> LocalizationEstimate:
    """Invert the Woodworth model (front assumed) and add sector-sized Gaussian error."""
    config = config or LocalizationConfig()
    bound = ear.max_itd
    side = 1.0 if features.itd >= 0 else -1.0
    if abs(features.itd) > bound + 1e-9:
        logger.debug("[Localization] itd %.3e beyond bound, clamping", features.itd)
        return LocalizationEstimate(azimuth=90.0 * side, azimuth_sigma=config.sigma_side_deg)
    truth = side * invert_itd(features.itd, ear)
    sigma = sector_sigma(truth, config)
    noise = 0.0 if super_ear else float(_rng(rng).normal(0.0, sigma))
    return LocalizationEstimate(azimuth=wrap_degrees(truth + noise), azimuth_sigma=max(sigma, 1e-6))


def distance_estimate(observed_level: float, nominal_level: Optional[float]) -> Tuple[Optional[float], str]:
    """Inverse-square distance from a known emitter level; (None, "unknown") otherwise."""
    if nominal_level is None or not math.isfinite(observed_level):
        return None, "unknown"
    return float(10.0 ** ((nominal_level - observed_level) / 20.0)), "coarse"


def mirror_front_back(azimuth: float) -> float:
    """Reflect across the interaural axis: 30 <-> 150, -30 <-> -150."""
    return wrap_degrees(180.0 - azimuth) if azimuth >= 0 else wrap_degrees(-180.0 - azimuth)


def fold_front(azimuth: float) -> float:
    a = wrap_degrees(azimuth)
    if a > 90.0 or a < -90.0:
        return mirror_front_back(a)
    return a


class FrontBack(NamedTuple):
    resolved: bool
    rear: bool
    azimuth: float  # world frame (head heading 0)


def resolve_front_back(
    azimuths: Sequence[float],
    headings: Sequence[float],
    config: Optional[LocalizationConfig] = None,
) -> FrontBack:
    """Decide front vs rear from apparent (front-assumed) azimuths seen across a head turn.

    ``azimuths[i]`` is the relative azimuth estimated at ``headings[i]``. The
    first and last samples are compared against the shift each hypothesis predicts.
    """
    config = config or LocalizationConfig()
    if len(azimuths) < 2 or len(azimuths) != len(headings):
        return FrontBack(False, False, float(azimuths[-1] + headings[-1]) if azimuths else 0.0)
    a1, a2 = azimuths[0], azimuths[-1]
    h1, h2 = headings[0], headings[-1]
    turn = wrap_degrees(h2 - h1)
    if abs(turn) < config.min_turn_deg:
        return FrontBack(False, False, wrap_degrees(a2 + h2))
    front_pred = fold_front(a1 - turn)
    rear_pred = fold_front(mirror_front_back(a1) - turn)
    err_front = abs(wrap_degrees(a2 - front_pred))
    err_rear = abs(wrap_degrees(a2 - rear_pred))
    if abs(err_front - err_rear) < config.min_turn_deg:
        return FrontBack(False, False, wrap_degrees(a2 + h2))
    if err_rear < err_front:
        return FrontBack(True, True, wrap_degrees(mirror_front_back(a2) + h2))
    return FrontBack(True, False, wrap_degrees(a2 + h2))
