from .binaural import ild_azimuth_proxy, ild_model, ild_scale, invert_itd, itd_model
from .cochleagram import (
    CochleagramFrame,
    InterauralFeatures,
    apply_sensitivity,
    channel_centers,
    db_to_power,
    dump_frames,
    interaural_features,
    power_to_db,
    preset_offsets,
    render_frame,
    render_window,
    summed_loudness,
)

__all__ = [
    "CochleagramFrame",
    "InterauralFeatures",
    "apply_sensitivity",
    "channel_centers",
    "db_to_power",
    "dump_frames",
    "ild_azimuth_proxy",
    "ild_model",
    "ild_scale",
    "interaural_features",
    "invert_itd",
    "itd_model",
    "power_to_db",
    "preset_offsets",
    "render_frame",
    "render_window",
    "summed_loudness",
]
