"""
Proxy Segmentation Model

Nearest-labeled-frame mask recall whose confidence decays exponentially
with embedding distance, plus the DICE score. A per-frame difficulty
shortens the decay length for frames that are hard to read (haze, an
active tool), so their predictions stay uncertain further from a label.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from ..data.types import DatasetManifest, FrameRef, LabelMask, ProbabilityMap
from ..errors import NoLabeledData, ShapeMismatch
from ..scoring import frame_entropies


@dataclass(frozen=True)
class ProxyLearner:
    """Labeled frames, their masks and the embedding rows of every frame"""

    embeddings: np.ndarray
    labeled: np.ndarray
    masks: np.ndarray
    bandwidth: float = 0.5
    manifest: DatasetManifest | None = None
    difficulty: np.ndarray | None = None

    @classmethod
    def fit(
        cls,
        embeddings: np.ndarray,
        labeled: Sequence[int],
        all_masks: np.ndarray,
        bandwidth: float = 0.5,
        manifest: DatasetManifest | None = None,
        difficulty: np.ndarray | None = None,
    ) -> ProxyLearner:
        """
        Remember the masks of the labeled frames

        Args:
            embeddings: (n, d) rows by global frame index
            labeled: Global indices of annotated frames
            all_masks: (n, h, w) ground truth; only labeled rows are read
            bandwidth: Distance at which confidence has decayed by 1/e
            difficulty: (n,) non-negative values by global frame index; frame i
                decays over bandwidth / (1 + difficulty[i]). None means 0 everywhere

        Raises:
            NoLabeledData: labeled is empty
        """
        labeled = np.asarray(labeled, dtype=np.int64)
        if labeled.size == 0:
            raise NoLabeledData("the proxy needs at least one labeled frame")
        return cls(
            embeddings=np.asarray(embeddings, dtype=np.float64),
            labeled=labeled,
            masks=np.asarray(all_masks)[labeled].astype(np.float64),
            bandwidth=bandwidth,
            manifest=manifest,
            difficulty=None if difficulty is None else np.asarray(difficulty, dtype=np.float64),
        )

    def nearest(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Position in `labeled` of the nearest labeled frame and its distance"""
        dist = cdist(self.embeddings[idx], self.embeddings[self.labeled])
        nearest = np.argmin(dist, axis=1)
        return nearest, dist[np.arange(len(idx)), nearest]

    def foreground(self, idx: np.ndarray) -> np.ndarray:
        """Foreground probability maps, shape (len(idx), h, w)"""
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        nearest, dist = self.nearest(idx)
        if self.difficulty is not None:
            dist = dist * (1.0 + self.difficulty[idx])
        confidence = np.exp(-dist / self.bandwidth)
        return 0.5 + (self.masks[nearest] - 0.5) * confidence[:, None, None]

    def entropies(self, idx: np.ndarray) -> np.ndarray:
        p = self.foreground(idx)
        return frame_entropies(np.stack([1.0 - p, p], axis=-1))

    def predict_masks(self, idx: np.ndarray) -> np.ndarray:
        """Argmax masks; an undecided 0.5 pixel is background"""
        return (self.foreground(idx) > 0.5).astype(np.uint8)


def proxy_predict(learner: ProxyLearner, frame: FrameRef | int) -> ProbabilityMap:
    """Two-class probability map (background, foreground) for one frame"""
    if isinstance(frame, FrameRef):
        if learner.manifest is None:
            raise ShapeMismatch("a FrameRef needs a proxy fitted with a manifest")
        frame = learner.manifest.global_index(frame)
    p = learner.foreground(np.array([frame]))[0]
    return ProbabilityMap(np.stack([1.0 - p, p], axis=-1))


def dice(pred: LabelMask | np.ndarray, truth: LabelMask | np.ndarray) -> float:
    """
    DICE overlap of the foreground (nonzero) pixels

    Both masks empty counts as a perfect match.
    """
    p = (pred.data if isinstance(pred, LabelMask) else np.asarray(pred)) > 0
    t = (truth.data if isinstance(truth, LabelMask) else np.asarray(truth)) > 0
    if p.shape != t.shape:
        raise ShapeMismatch(f"mask shapes differ: {p.shape} vs {t.shape}")
    total = int(p.sum()) + int(t.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(p, t).sum()) / total


def mean_dice(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean DICE over a stack of (n, h, w) masks"""
    p = np.asarray(pred) > 0
    t = np.asarray(truth) > 0
    if p.shape != t.shape:
        raise ShapeMismatch(f"mask stacks differ: {p.shape} vs {t.shape}")
    inter = np.logical_and(p, t).sum(axis=(1, 2))
    total = p.sum(axis=(1, 2)) + t.sum(axis=(1, 2))
    scores = np.where(total == 0, 1.0, 2.0 * inter / np.maximum(total, 1))
    return float(scores.mean())
