"""
Domain Types

Frames, manifests, embeddings, probability maps, masks, AL state and curves
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ..errors import (
    NonFiniteValue,
    NotADistribution,
    SchemaViolation,
    ShapeMismatch,
    ZeroNormRow,
)

# Rows within this distance of unit norm are left untouched on load
NORM_TOLERANCE = 1e-6
# Pixel sums within this distance of one are accepted as-is
SUM_TOLERANCE = 1e-5
# Pixel sums within this window are renormalized instead of rejected
RENORM_WINDOW = 1e-3


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def middle_frame(frame_count: int) -> int:
    """Index of the middle frame of a video"""
    return frame_count // 2


@dataclass(frozen=True, order=True)
class FrameRef:
    """A frame identified by its video and its position in that video"""

    video_id: int
    frame_idx: int

    def __post_init__(self) -> None:
        if self.video_id < 0 or self.frame_idx < 0:
            raise SchemaViolation(f"negative frame reference {self}")

    def __str__(self) -> str:
        return f"v{self.video_id}-f{self.frame_idx}"


@dataclass(frozen=True)
class VideoEntry:
    """One video of a manifest with its per-frame artifact paths"""

    video_id: int
    frame_count: int
    prob_maps: tuple[Path | None, ...] = ()
    masks: tuple[Path | None, ...] = ()

    def __post_init__(self) -> None:
        if self.frame_count < 1:
            raise SchemaViolation(f"video {self.video_id} has no frames")
        if not self.prob_maps:
            object.__setattr__(self, "prob_maps", (None,) * self.frame_count)
        if not self.masks:
            object.__setattr__(self, "masks", (None,) * self.frame_count)
        if len(self.prob_maps) != self.frame_count or len(self.masks) != self.frame_count:
            raise SchemaViolation(f"video {self.video_id}: per-frame path lists have wrong length")


@dataclass(frozen=True)
class DatasetManifest:
    """Videos, their ordered frames and the embedding file they index into"""

    videos: tuple[VideoEntry, ...]
    embedding_path: Path
    _offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ids = [v.video_id for v in self.videos]
        if ids != list(range(len(ids))):
            raise SchemaViolation(f"video ids must be dense 0..V-1 in order, got {ids}")
        offsets = [0]
        for video in self.videos:
            offsets.append(offsets[-1] + video.frame_count)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @classmethod
    def from_frame_counts(
        cls, counts: Sequence[int], embedding_path: Path = Path("embedding.emb")
    ) -> DatasetManifest:
        """Build an artifact-free manifest, mostly for in-memory use"""
        videos = tuple(VideoEntry(video_id=i, frame_count=c) for i, c in enumerate(counts))
        return cls(videos=videos, embedding_path=embedding_path)

    @property
    def num_videos(self) -> int:
        return len(self.videos)

    @property
    def total_frames(self) -> int:
        return self._offsets[-1]

    def frame_count(self, video_id: int) -> int:
        return self.videos[video_id].frame_count

    def global_index(self, ref: FrameRef) -> int:
        """Offset of a frame in the flat embedding matrix"""
        if ref.video_id >= self.num_videos or ref.frame_idx >= self.frame_count(ref.video_id):
            raise SchemaViolation(f"frame {ref} is outside the manifest")
        return self._offsets[ref.video_id] + ref.frame_idx

    def frame_ref(self, index: int) -> FrameRef:
        """Inverse of global_index"""
        if not 0 <= index < self.total_frames:
            raise SchemaViolation(f"global index {index} out of range")
        video_id = int(np.searchsorted(self._offsets, index, side="right")) - 1
        return FrameRef(video_id, index - self._offsets[video_id])

    def video_frames(self, video_id: int) -> range:
        """Global indices of one video"""
        return range(self._offsets[video_id], self._offsets[video_id + 1])

    def all_frames(self) -> Iterator[FrameRef]:
        for video in self.videos:
            for frame_idx in range(video.frame_count):
                yield FrameRef(video.video_id, frame_idx)

    def labeled_frames(self) -> list[FrameRef]:
        """Frames that carry an annotation mask"""
        return [
            FrameRef(v.video_id, i)
            for v in self.videos
            for i, mask in enumerate(v.masks)
            if mask is not None
        ]

    def prob_map_path(self, ref: FrameRef) -> Path | None:
        return self.videos[ref.video_id].prob_maps[ref.frame_idx]

    def mask_path(self, ref: FrameRef) -> Path | None:
        return self.videos[ref.video_id].masks[ref.frame_idx]


def normalize_rows(data: np.ndarray) -> np.ndarray:
    """Scale rows to unit Euclidean norm, leaving rows already within tolerance as they are"""
    norms = np.linalg.norm(data.astype(np.float64), axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroNormRow(f"row {int(zero[0])} has zero norm")
    out = data.astype(np.float32, copy=True)
    off = np.abs(norms - 1.0) > NORM_TOLERANCE
    out[off] = (data[off].astype(np.float64) / norms[off, None]).astype(np.float32)
    return out


@dataclass(frozen=True)
class EmbeddingMatrix:
    """One float32 embedding row per global frame index"""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        if data.ndim != 2:
            raise ShapeMismatch(f"embedding matrix must be 2-D, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            bad = np.argwhere(~np.isfinite(data))[0]
            raise NonFiniteValue(f"non-finite embedding value at row {bad[0]}, dim {bad[1]}")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dims(self) -> int:
        return int(self.data.shape[1])

    def normalized(self) -> EmbeddingMatrix:
        return EmbeddingMatrix(normalize_rows(self.data))


@dataclass(frozen=True)
class ProbabilityMap:
    """Per-pixel class probabilities, shape (height, width, classes)"""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        if data.ndim != 3 or data.shape[2] < 2:
            raise ShapeMismatch(f"probability map must be (h, w, C>=2), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteValue("non-finite probability value")
        if np.any(data < 0):
            y, x, _ = np.argwhere(data < 0)[0]
            raise NotADistribution(f"negative probability at pixel ({y}, {x})")
        sums = data.astype(np.float64).sum(axis=2)
        off = np.abs(sums - 1.0) > SUM_TOLERANCE
        if np.any(off):
            y, x = np.argwhere(off)[0]
            raise NotADistribution(f"pixel ({y}, {x}) sums to {sums[y, x]:.6f}")
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_raw(cls, data: np.ndarray) -> ProbabilityMap:
        """Expand a sigmoid channel and renormalize pixels that are close to summing to one"""
        data = np.asarray(data, dtype=np.float32)
        if data.ndim == 3 and data.shape[2] == 1:
            data = np.concatenate([data, 1.0 - data], axis=2)
        if data.ndim == 3 and not np.any(data < 0):
            sums = data.astype(np.float64).sum(axis=2, keepdims=True)
            fix = (np.abs(sums - 1.0) > SUM_TOLERANCE) & (np.abs(sums - 1.0) <= RENORM_WINDOW)
            if np.any(fix):
                data = np.where(fix, data / sums, data).astype(np.float32)
        return cls(data)

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def classes(self) -> int:
        return int(self.data.shape[2])

    def argmax(self) -> LabelMask:
        """Most probable class per pixel, ties to the lower class id"""
        return LabelMask(np.argmax(self.data, axis=2).astype(np.uint8))


@dataclass(frozen=True)
class LabelMask:
    """Per-pixel class ids, shape (height, width)"""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if data.ndim != 2:
            raise ShapeMismatch(f"mask must be 2-D, got shape {data.shape}")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class ALState:
    """Labeled set A_t, unlabeled pool U_t and the step counter"""

    labeled: tuple[FrameRef, ...]
    unlabeled: tuple[FrameRef, ...]
    step: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.step < 1:
            raise SchemaViolation("AL steps start at 1")
        overlap = set(self.labeled) & set(self.unlabeled)
        if overlap:
            raise SchemaViolation(f"frames both labeled and unlabeled: {sorted(overlap)[:3]}")
        if len(set(self.labeled)) != len(self.labeled):
            raise SchemaViolation("duplicate labeled frames")
        if len(set(self.unlabeled)) != len(self.unlabeled):
            raise SchemaViolation("duplicate unlabeled frames")

    @classmethod
    def initial(
        cls, pool: Iterable[FrameRef], labeled: Iterable[FrameRef], seed: int = 0
    ) -> ALState:
        labeled = tuple(labeled)
        chosen = set(labeled)
        return cls(
            labeled=labeled,
            unlabeled=tuple(f for f in pool if f not in chosen),
            step=1,
            seed=seed,
        )

    def advance(self, selected: Sequence[FrameRef]) -> ALState:
        """Move the selected frames to the labeled set"""
        picked = set(selected)
        return ALState(
            labeled=self.labeled + tuple(selected),
            unlabeled=tuple(f for f in self.unlabeled if f not in picked),
            step=self.step + 1,
            seed=self.seed,
        )


@dataclass(frozen=True)
class ALCurve:
    """DICE per AL step plus the full-data reference score"""

    points: tuple[tuple[int, float], ...]
    full_data_dice: float

    def __post_init__(self) -> None:
        points = tuple((int(s), float(d)) for s, d in self.points)
        steps = [s for s, _ in points]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise SchemaViolation(f"curve steps must be strictly increasing, got {steps}")
        object.__setattr__(self, "points", points)

    @property
    def steps(self) -> list[int]:
        return [s for s, _ in self.points]

    @property
    def scores(self) -> list[float]:
        return [d for _, d in self.points]
