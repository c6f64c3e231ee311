"""Shared fixtures: tiny manifests, strategy inputs and synthetic worlds"""

import os
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pytest

from cowal.config import reload_settings
from cowal.data import ALState, DatasetManifest
from cowal.scoring import FrameScore
from cowal.simulator import SyntheticWorld, WorldParams, generate_world, write_world
from cowal.strategies import StrategyInput, reset_registry


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch: pytest.MonkeyPatch, tmp_path: Path):
    """Settings and strategy registry rebuilt from a clean environment, no .env in the cwd"""
    monkeypatch.chdir(tmp_path)
    for key in list(os.environ):
        if key.startswith("COWAL_"):
            monkeypatch.delenv(key)
    reload_settings()
    yield
    reload_settings()
    reset_registry()


def build_input(
    points: Sequence,
    labeled: Sequence[int] = (),
    entropies: Optional[Sequence[float]] = None,
    budget: int = 1,
    seed: int = 0,
    videos: Optional[Sequence[int]] = None,
) -> StrategyInput:
    """
    StrategyInput over frames numbered by global index

    Every frame not in `labeled` is unlabeled. `entropies` is indexed by
    global frame index; labeled entries are ignored.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    manifest = DatasetManifest.from_frame_counts(list(videos) if videos else [n])
    frames = list(manifest.all_frames())
    labeled_set = set(labeled)
    state = ALState.initial(frames, [frames[i] for i in labeled], seed=seed)
    scores: tuple[FrameScore, ...] = ()
    if entropies is not None:
        scores = tuple(
            FrameScore(frames[i], float(entropies[i])) for i in range(n) if i not in labeled_set
        )
    return StrategyInput(
        manifest=manifest,
        embeddings=points,
        state=state,
        budget=budget,
        seed=seed,
        frame_entropies=scores,
    )


@pytest.fixture
def make_input() -> Callable[..., StrategyInput]:
    return build_input


@pytest.fixture
def small_world() -> SyntheticWorld:
    return generate_world(WorldParams(videos=6, frames=12), seed=3)


@pytest.fixture
def world_dir(tmp_path: Path, small_world: SyntheticWorld) -> Path:
    """A written world whose first three middle frames are labeled"""
    out = tmp_path / "world"
    write_world(small_world, out, labeled=[6, 18, 30])
    return out
