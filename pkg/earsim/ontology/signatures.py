"""Spectral signature helpers shared by the ontology, the renderer and identification.

Signatures are non-negative vectors over filterbank channels that sum to 1.
Frequency math happens on a log2 axis so Doppler shifts are translations.
"""

from typing import Optional, Sequence

import numpy as np

from ..errors import MalformedSignatureError

SUM_TOLERANCE = 1e-6


def make_signature(
    centers_hz: Sequence[float],
    width_octaves: float,
    channel_centers: np.ndarray,
    weights: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Sum of equal-peak Gaussian bumps in log-frequency, normalized to sum 1."""
    octaves = np.log2(channel_centers)
    weights = weights if weights is not None else [1.0] * len(centers_hz)
    sig = np.zeros(len(channel_centers))
    for center, w in zip(centers_hz, weights):
        sig += w * np.exp(-0.5 * ((octaves - np.log2(center)) / width_octaves) ** 2)
    return normalize(sig)


def normalize(profile: np.ndarray) -> np.ndarray:
    profile = np.clip(np.asarray(profile, dtype=float), 0.0, None)
    total = profile.sum()
    if total <= 0:
        return np.zeros_like(profile)
    return profile / total


def check_signature(signature: Sequence[float], channels: int) -> np.ndarray:
    """Validate a template signature; raises MalformedSignatureError."""
    sig = np.asarray(signature, dtype=float)
    if sig.ndim != 1 or len(sig) != channels:
        raise MalformedSignatureError(f"signature has {sig.size} entries, expected {channels}")
    if not np.all(np.isfinite(sig)) or np.any(sig < 0):
        raise MalformedSignatureError("signature entries must be finite and >= 0")
    if abs(sig.sum() - 1.0) > SUM_TOLERANCE:
        raise MalformedSignatureError(f"signature sums to {sig.sum():.6f}, expected 1")
    return sig


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def spectral_centroid(profile: np.ndarray, channel_centers: np.ndarray) -> float:
    """Energy-weighted geometric mean frequency (Hz). 0 for an empty profile."""
    p = np.clip(np.asarray(profile, dtype=float), 0.0, None)
    total = p.sum()
    if total <= 0:
        return 0.0
    return float(2.0 ** (np.dot(p, np.log2(channel_centers)) / total))


def shift_signature(signature: np.ndarray, ratio: float, channel_centers: np.ndarray) -> np.ndarray:
    """Scale every frequency by ``ratio`` (Doppler) and re-sample onto the channel grid.

    ratio > 1 moves energy up. Energy falling off the grid is dropped before
    re-normalizing.
    """
    if ratio <= 0:
        raise ValueError("ratio must be > 0")
    if abs(ratio - 1.0) < 1e-12:
        return np.asarray(signature, dtype=float).copy()
    octaves = np.log2(channel_centers)
    shift = np.log2(ratio)
    shifted = np.interp(octaves - shift, octaves, signature, left=0.0, right=0.0)
    return normalize(shifted)
