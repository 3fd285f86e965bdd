from .identification import IdentificationContext, estimate_doppler, identify_all, identify_stream, match_words
from .localization import (
    FrontBack,
    distance_estimate,
    fold_front,
    localize,
    mirror_front_back,
    resolve_front_back,
    sector_sigma,
)
from .segregation import NULL_CLUSTER, excess_power, segregate_window, spectral_valleys
from .state import (
    CategoryGuess,
    Cluster,
    HeardObject,
    LocalizationEstimate,
    SegregationResult,
    SpeechFields,
    WordMatch,
    WordTarget,
)
from .tracking import StreamTrack, StreamTracker, TrackUpdate, observed_envelope, track_streams

__all__ = [
    "NULL_CLUSTER",
    "CategoryGuess",
    "Cluster",
    "FrontBack",
    "HeardObject",
    "IdentificationContext",
    "LocalizationEstimate",
    "SegregationResult",
    "SpeechFields",
    "StreamTrack",
    "StreamTracker",
    "TrackUpdate",
    "WordMatch",
    "WordTarget",
    "distance_estimate",
    "estimate_doppler",
    "excess_power",
    "fold_front",
    "identify_all",
    "identify_stream",
    "localize",
    "match_words",
    "mirror_front_back",
    "observed_envelope",
    "resolve_front_back",
    "sector_sigma",
    "segregate_window",
    "spectral_valleys",
    "track_streams",
]
