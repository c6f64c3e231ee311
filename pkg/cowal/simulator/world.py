"""
Synthetic Correlated Videos

Every video is a slow random walk of a 2-D latent position inside the unit
box. Videos of one scene start at a shared anchor, so held-out videos revisit
the ground the training videos cover. Frame features are a fixed
random-Fourier lift of the latent plus Gaussian noise, so consecutive frames
are near-duplicates in feature space.

Ground-truth masks are disks centred on the latent position. The disk grows
with the tool activity of the frame: the tool enters during the first quarter
of a video and withdraws during the last, drifting at a pace set by the walk
step. Each video also carries one burst of haze, a run of consecutive frames
that look the same to the features but leave the segmenter unsure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..data.io import write_mask, write_matrix, write_prob_map
from ..data.manifest import write_manifest
from ..data.types import (
    DatasetManifest,
    EmbeddingMatrix,
    FrameRef,
    LabelMask,
    ProbabilityMap,
    VideoEntry,
    middle_frame,
    normalize_rows,
)
from ..errors import BadParams
from .proxy import ProxyLearner

logger = logging.getLogger(__name__)

# Scene anchors sit on a circle of this radius around the box centre
SCENE_RADIUS = 0.3
SCENE_JITTER = 0.02

# Activity drift per unit step while the tool enters or withdraws
ACTIVITY_DRIFT = 5.0
INITIAL_ACTIVITY = 0.2


class WorldParams(BaseModel):
    """Generator parameters"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    videos: int = Field(default=12, ge=1)
    frames: int = Field(default=40, ge=1)
    step: float = Field(default=0.02, ge=0)
    turn_noise: float = Field(default=1.0, ge=0)
    feature_dim: int = Field(default=32, ge=1)
    lengthscale: float = Field(default=0.25, gt=0)
    noise: float = Field(default=0.02, ge=0)
    grid: int = Field(default=24, ge=4)
    radius: float = Field(default=0.2, gt=0, lt=0.5)
    scenes: int = Field(default=3, ge=0)
    activity_pace: float = Field(default=2.0, ge=0)
    tool_floor: float = Field(default=0.4, gt=0, le=1)
    haze_frames: int = Field(default=6, ge=0)
    haze_weight: float = Field(default=3.0, ge=0)
    activity_weight: float = Field(default=1.0, ge=0)

    @classmethod
    def parse(cls, **values) -> WorldParams:
        """Validate values, raising BadParams instead of a pydantic error"""
        try:
            return cls(**values)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise BadParams(f"invalid world parameters: {problems}") from e


@dataclass(frozen=True)
class SyntheticWorld:
    """Latents, features and ground-truth masks of every frame, in global order"""

    params: WorldParams
    seed: int
    latents: np.ndarray
    features: np.ndarray
    masks: np.ndarray
    scene_of_video: tuple[int, ...]
    activity: np.ndarray
    haze: np.ndarray

    @cached_property
    def manifest(self) -> DatasetManifest:
        return DatasetManifest.from_frame_counts([self.params.frames] * self.params.videos)

    @property
    def difficulty(self) -> np.ndarray:
        """Per-frame difficulty the proxy reads: haze and tool activity, weighted"""
        p = self.params
        return p.haze_weight * self.haze + p.activity_weight * self.activity

    @property
    def total_frames(self) -> int:
        return self.params.videos * self.params.frames

    def video_of(self, index: int | np.ndarray) -> int | np.ndarray:
        return index // self.params.frames

    def frames_of(self, videos: Sequence[int]) -> np.ndarray:
        """Global indices of all frames of the given videos, ascending"""
        f = self.params.frames
        return np.concatenate([np.arange(v * f, (v + 1) * f) for v in sorted(videos)]).astype(
            np.int64
        )

    def mask(self, index: int) -> LabelMask:
        return LabelMask(self.masks[index])

    def feature_matrix(self) -> EmbeddingMatrix:
        """Unit-normalized features, usable directly as embeddings"""
        return EmbeddingMatrix(normalize_rows(self.features))


def _reflect(position: np.ndarray, direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    for axis in range(2):
        if position[axis] < 0.0:
            position[axis] = -position[axis]
            direction[axis] = -direction[axis]
        elif position[axis] > 1.0:
            position[axis] = 2.0 - position[axis]
            direction[axis] = -direction[axis]
    return np.clip(position, 0.0, 1.0), direction


def _walk(
    start: np.ndarray, frames: int, step: float, turn_noise: float, rng: np.random.Generator
) -> np.ndarray:
    heading = rng.uniform(0.0, 2 * np.pi)
    position = start.copy()
    path = np.empty((frames, 2))
    for t in range(frames):
        path[t] = position
        heading += rng.normal(0.0, turn_noise)
        direction = np.array([np.cos(heading), np.sin(heading)])
        position, direction = _reflect(position + step * direction, direction)
        heading = float(np.arctan2(direction[1], direction[0]))
    return path


def _activity(frames: int, step: float, pace: float, rng: np.random.Generator) -> np.ndarray:
    level = rng.uniform(0.0, INITIAL_ACTIVITY)
    quarter = max(1, frames // 4)
    out = np.empty(frames)
    for t in range(frames):
        out[t] = level
        if t < quarter:
            drift = ACTIVITY_DRIFT
        elif t >= frames - quarter:
            drift = -ACTIVITY_DRIFT
        else:
            drift = 0.0
        level = float(np.clip(level + step * (drift + pace * rng.normal()), 0.0, 1.0))
    return out


def _haze(frames: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """One run of hazy frames, placed in the middle half of the video when it fits"""
    out = np.zeros(frames)
    length = min(length, frames)
    if length == 0:
        return out
    low = frames // 4
    high = max(low, frames - frames // 4 - length)
    start = min(int(rng.integers(low, high + 1)), frames - length)
    out[start : start + length] = 1.0
    return out


def disk_masks(latents: np.ndarray, grid: int, radius: float | np.ndarray) -> np.ndarray:
    """Binary disks centred at each latent position; radius is scalar or per frame"""
    radius = np.broadcast_to(np.asarray(radius, dtype=np.float64), (len(latents),))
    centres = (np.arange(grid) + 0.5) / grid
    yy, xx = np.meshgrid(centres, centres, indexing="ij")
    dy = yy[None, :, :] - latents[:, 1, None, None]
    dx = xx[None, :, :] - latents[:, 0, None, None]
    return (dx * dx + dy * dy <= (radius * radius)[:, None, None]).astype(np.uint8)


def generate_world(params: WorldParams, seed: int = 0) -> SyntheticWorld:
    """
    Generate a world deterministically from (params, seed)

    Raises:
        BadParams: Parameters out of range
    """
    params = WorldParams.parse(**params.model_dump())
    lift_seq, walk_seq, noise_seq, tool_seq = np.random.SeedSequence(seed).spawn(4)

    lift = np.random.default_rng(lift_seq)
    omega = lift.normal(0.0, 1.0 / params.lengthscale, size=(2, params.feature_dim))
    phase = lift.uniform(0.0, 2 * np.pi, size=params.feature_dim)

    walk = np.random.default_rng(walk_seq)
    if params.scenes:
        angles = 2 * np.pi * np.arange(params.scenes) / params.scenes + walk.uniform(0, 2 * np.pi)
        anchors = 0.5 + SCENE_RADIUS * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        scene_of_video = tuple(v % params.scenes for v in range(params.videos))
    else:
        anchors = None
        scene_of_video = tuple(range(params.videos))

    paths = []
    for v in range(params.videos):
        if anchors is not None:
            start = np.clip(anchors[scene_of_video[v]] + walk.normal(0, SCENE_JITTER, 2), 0, 1)
        else:
            start = walk.uniform(0.1, 0.9, size=2)
        paths.append(_walk(start, params.frames, params.step, params.turn_noise, walk))
    latents = np.concatenate(paths, axis=0)

    features = np.sqrt(2.0 / params.feature_dim) * np.cos(latents @ omega + phase)
    features += np.random.default_rng(noise_seq).normal(0.0, params.noise, size=features.shape)

    tool = np.random.default_rng(tool_seq)
    activity = np.concatenate(
        [
            _activity(params.frames, params.step, params.activity_pace, tool)
            for _ in range(params.videos)
        ]
    )
    haze = np.concatenate(
        [_haze(params.frames, params.haze_frames, tool) for _ in range(params.videos)]
    )
    radii = params.radius * (params.tool_floor + (1.0 - params.tool_floor) * activity)

    logger.debug(
        "generated world: %d videos x %d frames, step %.3f, seed %d",
        params.videos,
        params.frames,
        params.step,
        seed,
    )
    return SyntheticWorld(
        params=params,
        seed=seed,
        latents=latents,
        features=features.astype(np.float32),
        masks=disk_masks(latents, params.grid, radii),
        scene_of_video=scene_of_video,
        activity=activity,
        haze=haze,
    )


def initial_frames(world: SyntheticWorld, videos: Sequence[int]) -> list[int]:
    """Middle frame of each given video"""
    f = world.params.frames
    return [v * f + middle_frame(f) for v in videos]


def write_world(
    world: SyntheticWorld,
    out_dir: Path,
    labeled: Sequence[int] | None = None,
    embeddings: EmbeddingMatrix | None = None,
    bandwidth: float = 0.5,
) -> Path:
    """
    Write a world as a selectable dataset

    Layout: manifest.json, features.emb (raw features), embedding.emb,
    truth/ (every ground-truth mask), masks/ (labeled frames only) and
    probs/ (proxy predictions fit on the labeled frames).

    Args:
        world: Generated world
        out_dir: Target directory, created if needed
        labeled: Global indices that get a mask; middle frames of the first
            min(10, V) videos when omitted
        embeddings: Embedding matrix to write; normalized features when omitted
        bandwidth: Proxy confidence decay used for the probability maps

    Returns:
        Path of the manifest
    """
    out_dir = Path(out_dir)
    for sub in ("truth", "masks", "probs"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
    if labeled is None:
        labeled = initial_frames(world, range(min(10, world.params.videos)))
    labeled_set = set(int(i) for i in labeled)
    if embeddings is None:
        embeddings = world.feature_matrix()

    write_matrix(EmbeddingMatrix(world.features), out_dir / "features.emb")
    write_matrix(embeddings, out_dir / "embedding.emb")

    learner = ProxyLearner.fit(
        embeddings.data,
        sorted(labeled_set),
        world.masks,
        bandwidth,
        difficulty=world.difficulty,
    )
    foreground = learner.foreground(np.arange(world.total_frames))

    manifest = world.manifest
    videos = []
    for video in manifest.videos:
        prob_maps: list[Path | None] = []
        masks: list[Path | None] = []
        for frame_idx in range(video.frame_count):
            index = manifest.global_index(FrameRef(video.video_id, frame_idx))
            stem = f"v{video.video_id:03d}_f{frame_idx:04d}"
            write_mask(world.mask(index), out_dir / "truth" / f"{stem}.pgm")

            prob_path = out_dir / "probs" / f"{stem}.prb"
            p = foreground[index]
            write_prob_map(ProbabilityMap(np.stack([1.0 - p, p], axis=-1)), prob_path)
            prob_maps.append(prob_path)

            if index in labeled_set:
                mask_path = out_dir / "masks" / f"{stem}.pgm"
                write_mask(world.mask(index), mask_path)
                masks.append(mask_path)
            else:
                masks.append(None)
        videos.append(
            VideoEntry(
                video_id=video.video_id,
                frame_count=video.frame_count,
                prob_maps=tuple(prob_maps),
                masks=tuple(masks),
            )
        )

    manifest_path = out_dir / "manifest.json"
    write_manifest(
        DatasetManifest(videos=tuple(videos), embedding_path=out_dir / "embedding.emb"),
        manifest_path,
    )
    logger.info(
        "wrote world with %d frames (%d labeled) to %s",
        world.total_frames,
        len(labeled_set),
        out_dir,
    )
    return manifest_path
