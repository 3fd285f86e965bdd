"""Window-level scene analysis: cluster above-background cochleagram cells into sources.

Each active (frame, channel) cell is described by a spatial cue (ILD-derived
azimuth), its log-frequency and when its channel switched on within the window.
k-means is fitted for k = 1..max_clusters; a split is kept only when the
silhouette score and the centroid separation both clear their thresholds.

Cells in a spectral valley (quieter than both neighbours) sit where two bands
overlap, so their ILD blends two sources. They stay out of the fit and join
the cluster of their louder neighbour afterwards.
"""

import logging
from collections import Counter
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.cluster import KMeans
from sklearn.metrics import silhouette_score

from ..config import EarConfig, SegregationConfig
from ..frontend import CochleagramFrame, InterauralFeatures, db_to_power, ild_azimuth_proxy
from .state import Cluster, SegregationResult

logger = logging.getLogger(__name__)

NULL_CLUSTER = -1

Window = Sequence[Tuple[CochleagramFrame, InterauralFeatures]]


def excess_power(frame: CochleagramFrame) -> Tuple[np.ndarray, np.ndarray]:
    """Per-ear power above the background floor (linear units, clipped at 0)."""
    bg = float(db_to_power(frame.background_db))
    left = np.clip(db_to_power(frame.left_energy) - bg, 0.0, None)
    right = np.clip(db_to_power(frame.right_energy) - bg, 0.0, None)
    return left, right


def spectral_valleys(power: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Active cells strictly quieter than both active channel neighbours (frames x channels)."""
    valley = np.zeros_like(active, dtype=bool)
    inner = power[:, 1:-1]
    valley[:, 1:-1] = (
        active[:, 1:-1]
        & active[:, :-2]
        & active[:, 2:]
        & (inner < power[:, :-2])
        & (inner < power[:, 2:])
    )
    return valley


def _cells(window: Window, ear: EarConfig, config: SegregationConfig):
    """Active cells, their feature rows, per-cell source power and the valley mask."""
    centers = ear.channel_centers
    octaves = np.log2(centers / centers[0])
    n_frames = len(window)
    span = max(n_frames - 1, 1)
    cells: List[Tuple[int, int]] = []
    rows: List[List[float]] = []
    power = np.zeros((n_frames, ear.channels))
    first_on = np.full(ear.channels, -1)
    active = np.zeros((n_frames, ear.channels), dtype=bool)
    per_ear = []
    for f, (frame, _) in enumerate(window):
        left, right = excess_power(frame)
        per_ear.append((left, right))
        # geometric mean of the ears cancels the +/- ILD/2 split exactly
        power[f] = np.sqrt(left * right)
        level = 0.5 * (frame.left_energy + frame.right_energy) - frame.background_db
        active[f] = (level >= config.cell_threshold_db) & (left > 0) & (right > 0)
        newly = active[f] & (first_on < 0)
        first_on[newly] = f
    valley = spectral_valleys(power, active)
    mixed: List[bool] = []
    for f in range(n_frames):
        left, right = per_ear[f]
        for ch in np.flatnonzero(active[f]):
            ild = 10.0 * np.log10(right[ch] / left[ch])
            az = float(ild_azimuth_proxy(ild, centers[ch], ear))
            cells.append((f, int(ch)))
            mixed.append(bool(valley[f, ch]))
            rows.append([
                az / config.azimuth_scale_deg,
                octaves[ch] / config.octave_scale,
                config.onset_weight * first_on[ch] / span,
            ])
    return cells, np.asarray(rows, dtype=float).reshape(-1, 3), power, np.asarray(mixed, dtype=bool)


def _fold_minor(features: np.ndarray, labels: np.ndarray, channels: np.ndarray, min_channels: int) -> np.ndarray:
    """Merge clusters spanning fewer than ``min_channels`` channels into the nearest centroid."""
    labels = labels.copy()
    while True:
        ids = np.unique(labels)
        if len(ids) < 2:
            return labels
        spans = {c: len(np.unique(channels[labels == c])) for c in ids}
        minor = min(ids, key=lambda c: (spans[c], c))
        if spans[minor] >= min_channels:
            return labels
        centroids = {c: features[labels == c].mean(axis=0) for c in ids}
        target = min(
            (c for c in ids if c != minor),
            key=lambda c: (float(np.linalg.norm(centroids[c] - centroids[minor])), c),
        )
        labels[labels == minor] = target


def _choose_k(
    features: np.ndarray,
    channels: np.ndarray,
    config: SegregationConfig,
    seed: int,
) -> Tuple[np.ndarray, Optional[float]]:
    n = len(features)
    single = np.zeros(n, dtype=int)
    # centroids sit inside the bounding box, so a tight box can never pass the separation test
    if n < 2 * config.min_cluster_cells or np.linalg.norm(np.ptp(features, axis=0)) < config.separation_min:
        return single, None
    best_labels, best_score = single, None
    for k in range(2, min(config.max_clusters, n - 1) + 1):
        model = KMeans(n_clusters=k, n_init=3, random_state=seed).fit(features)
        labels = _fold_minor(features, model.labels_, channels, config.min_cluster_channels)
        ids = np.unique(labels)
        if len(ids) < 2 or min(Counter(labels).values()) < config.min_cluster_cells:
            continue
        centers = [features[labels == c].mean(axis=0) for c in ids]
        gaps = [np.linalg.norm(centers[i] - centers[j]) for i in range(len(ids)) for j in range(i + 1, len(ids))]
        if min(gaps) < config.separation_min:
            continue
        score = float(silhouette_score(features, labels))
        if score >= config.silhouette_min and (best_score is None or score > best_score + 1e-12):
            best_labels, best_score = labels, score
    return best_labels, best_score


def _attach_valleys(raw: np.ndarray, cells: List[Tuple[int, int]], mixed: np.ndarray, power: np.ndarray) -> None:
    """Give each valley cell the label of its louder channel neighbour in the same frame."""
    index = {cell: i for i, cell in enumerate(cells)}
    for i in np.flatnonzero(mixed):
        f, ch = cells[i]
        louder = ch - 1 if power[f, ch - 1] >= power[f, ch + 1] else ch + 1
        raw[i] = raw[index[(f, louder)]]


def segregate_window(
    window: Window,
    ear: EarConfig,
    config: Optional[SegregationConfig] = None,
    seed: int = 0,
) -> SegregationResult:
    """Cluster a window (>= 3 frames) of cochleagram frames; background cells get NULL_CLUSTER."""
    config = config or SegregationConfig()
    if len(window) < config.window_min_frames:
        raise ValueError(f"window needs >= {config.window_min_frames} frames, got {len(window)}")
    labels = np.full((len(window), ear.channels), NULL_CLUSTER, dtype=int)
    cells, features, power, mixed = _cells(window, ear, config)
    if len(cells) < config.min_cluster_cells:
        return SegregationResult(labels=labels)

    # a valley's neighbours are louder, so they are never valleys themselves
    core = ~mixed
    channels = np.array([ch for _, ch in cells], dtype=int)
    raw = np.zeros(len(cells), dtype=int)
    core_labels, score = _choose_k(features[core], channels[core], config, seed)
    raw[core] = core_labels
    _attach_valleys(raw, cells, mixed, power)

    # stable labels: order clusters by mean azimuth then frequency of the unmixed cells
    def position(c):
        rows = features[(raw == c) & core]
        return rows[:, 0].mean(), rows[:, 1].mean()

    order = sorted(set(raw), key=position)
    relabel = {old: new for new, old in enumerate(order)}

    clusters = []
    for old in order:
        new = relabel[old]
        idx = np.flatnonzero(raw == old)
        members = [cells[i] for i in idx]
        for f, ch in members:
            labels[f, ch] = new
        azimuth_rows = features[(raw == old) & core, 0]
        clusters.append(_summarize(new, members, window, power, azimuth_rows, config))
    logger.debug(
        "[Segregation] %d clusters (%d valley cells) in window ending %.2f",
        len(clusters),
        int(mixed.sum()),
        window[-1][0].t,
    )
    return SegregationResult(labels=labels, clusters=clusters, silhouette=score)


def _summarize(
    label: int,
    members: List[Tuple[int, int]],
    window: Window,
    power: np.ndarray,
    azimuth_rows: np.ndarray,
    config: SegregationConfig,
) -> Cluster:
    n_ch = power.shape[1]
    mask = np.zeros_like(power, dtype=bool)
    for f, ch in members:
        mask[f, ch] = True
    frames_on = np.flatnonzero(mask.any(axis=1))
    masked = np.where(mask, power, 0.0)
    profile = masked[frames_on].mean(axis=0)

    itd_num = 0.0
    weight = 0.0
    tags: Counter = Counter()
    ild = np.zeros(n_ch)
    for f, ch in members:
        frame, _ = window[f]
        w = power[f, ch]
        itd_num += frame.channel_itd[ch] * w
        weight += w
        ild[ch] = frame.right_energy[ch] - frame.left_energy[ch]
        tag = frame.channel_source[ch]
        if tag is not None:
            tags[tag] += w
    peak = float(profile.max())
    return Cluster(
        label=label,
        cells=members,
        profile=profile,
        azimuth_proxy=float(azimuth_rows.mean() * config.azimuth_scale_deg),
        itd=itd_num / weight if weight > 0 else 0.0,
        ild=ild,
        loudness_db=float(10.0 * np.log10(peak)) if peak > 0 else float("-inf"),
        onset=float(window[int(frames_on[0])][0].t),
        t_last=float(window[int(frames_on[-1])][0].t),
        source_tag=tags.most_common(1)[0][0] if tags else None,
    )
