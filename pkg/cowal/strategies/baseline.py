"""
Baseline Strategies

Uniform random sampling and temporal coverage
"""

from collections import defaultdict
from typing import List

import numpy as np

from ..data.types import middle_frame
from .base import Strategy, StrategyCategory, StrategyInput, StrategyMetadata


class RandomStrategy(Strategy):
    """Uniform sampling without replacement"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="random",
            description="Sample Q unlabeled frames uniformly at random.",
            category=StrategyCategory.BASELINE,
        )

    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        # pool order, not index order
        pool = [inp.manifest.global_index(f) for f in inp.state.unlabeled]
        rng = np.random.default_rng(inp.seed)
        positions = np.sort(rng.choice(len(pool), size=inp.budget, replace=False))
        return [(pool[p], f"random draw={int(p)}") for p in positions]


class TemporalCoverageStrategy(Strategy):
    """Favor videos with few labels, then the frame farthest in time from them"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="temporal",
            description=(
                "Pick the video with the fewest labeled frames, then its unlabeled frame "
                "farthest in time from that video's labeled frames."
            ),
            category=StrategyCategory.BASELINE,
        )

    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        labeled = defaultdict(set)
        unlabeled = defaultdict(set)
        for f in inp.state.labeled:
            labeled[f.video_id].add(f.frame_idx)
        for f in inp.state.unlabeled:
            unlabeled[f.video_id].add(f.frame_idx)

        picks = []
        for _ in range(inp.budget):
            video = min(
                (v for v, frames in unlabeled.items() if frames),
                key=lambda v: (len(labeled[v]), v),
            )
            candidates = np.array(sorted(unlabeled[video]))
            if labeled[video]:
                anchors = np.array(sorted(labeled[video]))
                gaps = np.abs(candidates[:, None] - anchors[None, :]).min(axis=1)
                best = int(np.argmax(gaps))
                reason = f"video={video} gap={int(gaps[best])}"
            else:
                mid = middle_frame(inp.manifest.frame_count(video))
                best = int(np.argmin(np.abs(candidates - mid)))
                reason = f"video={video} middle"
            frame_idx = int(candidates[best])
            unlabeled[video].discard(frame_idx)
            labeled[video].add(frame_idx)
            picks.append((inp.manifest.video_frames(video)[frame_idx], reason))
        return picks
