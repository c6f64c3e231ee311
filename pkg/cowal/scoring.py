"""
Scoring Primitives

Pixel and frame entropy, cosine similarity and distance to a set
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data.types import SUM_TOLERANCE, FrameRef, ProbabilityMap
from .errors import EmptySet, NonFiniteValue, NotADistribution, ZeroVector

# Lower clamp inside the log; bias is below 1e-10 nats per pixel
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class FrameScore:
    """Uncertainty of one frame in nats"""

    frame: FrameRef
    value: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.value) or self.value < 0:
            raise NonFiniteValue(f"frame score for {self.frame} must be finite and >= 0")


def _entropy_along_last(p: np.ndarray) -> np.ndarray:
    return -np.sum(p * np.log(np.clip(p, LOG_FLOOR, 1.0)), axis=-1)


def pixel_entropy(p: np.ndarray) -> float:
    """Shannon entropy (nats) of one probability vector, with 0 ln 0 = 0"""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > SUM_TOLERANCE:
        raise NotADistribution(f"{p.tolist()} is not a probability vector")
    return float(max(_entropy_along_last(p), 0.0))


def frame_entropy(prob_map: ProbabilityMap | np.ndarray) -> float:
    """
    Sum of pixel entropies of a probability map

    Args:
        prob_map: ProbabilityMap or raw (h, w, C) array

    Raises:
        NotADistribution: A pixel is not a distribution; the message names the pixel
    """
    data = prob_map.data if isinstance(prob_map, ProbabilityMap) else np.asarray(prob_map)
    data = data.astype(np.float64)
    bad = np.any(data < 0, axis=-1) | (np.abs(data.sum(axis=-1) - 1.0) > SUM_TOLERANCE)
    if np.any(bad):
        y, x = np.argwhere(bad)[0]
        raise NotADistribution(f"pixel ({y}, {x}) is not a probability vector")
    return float(np.clip(_entropy_along_last(data), 0.0, None).sum())


def frame_entropies(maps: np.ndarray) -> np.ndarray:
    """Frame entropy for a stack of maps shaped (frames, h, w, C); inputs are trusted"""
    maps = np.asarray(maps, dtype=np.float64)
    return np.clip(_entropy_along_last(maps), 0.0, None).sum(axis=(1, 2))


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two nonzero vectors"""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("cosine similarity of a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def min_dist_to_set(x: np.ndarray, s: np.ndarray) -> float:
    """Euclidean distance from x to the closest member of s"""
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    if s.size == 0:
        raise EmptySet("distance to an empty set")
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(cdist(x, s).min())
