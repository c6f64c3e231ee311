"""
Correlation-Aware Strategies

Cluster all frames with K = |A| + Q, pin the clusters of labeled frames and
take one frame from each of the Q free clusters: the most uncertain one
(cowal) or the one closest to the centroid (cowal-center).
"""

import logging
from abc import abstractmethod
from typing import List

import numpy as np
from scipy.spatial.distance import cdist

from ..clustering.pipeline import full_cowal_clustering
from .base import Strategy, StrategyCategory, StrategyInput, StrategyMetadata
from .diversity import k_center_greedy
from .uncertainty import rank_by_entropy

logger = logging.getLogger(__name__)


class _ClusterStrategy(Strategy):
    """Shared clustering and empty-cluster repair"""

    @abstractmethod
    def _pick(
        self, inp: StrategyInput, members: np.ndarray, centroid: np.ndarray
    ) -> tuple[int, str]:
        """Choose one global index among the unlabeled members of a free cluster"""
        pass

    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        labeled, pool = inp.labeled_idx, inp.unlabeled_idx
        rows = np.concatenate([labeled, pool])
        n_fixed = len(labeled)
        result, _ = full_cowal_clustering(
            inp.points[rows],
            range(n_fixed),
            inp.budget,
            inp.seed,
            restarts=inp.restarts,
            max_iter=inp.max_iter,
            tol=inp.tol,
        )

        picks: List[tuple[int, str]] = []
        empty = 0
        for cluster in range(n_fixed, result.k):
            members = result.members(cluster)
            members = rows[members[members >= n_fixed]]
            if members.size == 0:
                empty += 1
                continue
            idx, reason = self._pick(inp, members, result.centroids[cluster])
            picks.append((idx, f"cluster={cluster - n_fixed} {reason}"))

        if empty:
            logger.info("%s: %d free clusters had no unlabeled member", self.metadata.name, empty)
            in_free = result.assignment >= n_fixed
            in_free[:n_fixed] = False
            picks.extend(self._repair(inp, picks, rows[in_free], empty))
        return picks

    def _repair(
        self, inp: StrategyInput, picks: List[tuple[int, str]], free_members: np.ndarray, count: int
    ) -> List[tuple[int, str]]:
        chosen = {idx for idx, _ in picks}
        pool = inp.unlabeled_idx
        candidates = np.array([i for i in np.sort(free_members) if i not in chosen], dtype=np.int64)
        fallback = np.array([i for i in pool if i not in chosen], dtype=np.int64)

        repairs: List[tuple[int, str]] = []
        if inp.has_entropies:
            for group, label in ((candidates, "repair"), (fallback, "repair-global")):
                group = np.array([i for i in group if i not in chosen], dtype=np.int64)
                if len(repairs) == count or group.size == 0:
                    continue
                entropy = inp.entropies(group)
                for p in rank_by_entropy(group, entropy)[: count - len(repairs)]:
                    repairs.append((int(group[p]), f"{label} entropy={entropy[p]:.6f}"))
                    chosen.add(int(group[p]))
            return repairs

        reference = np.concatenate([inp.labeled_idx, np.array(sorted(chosen), dtype=np.int64)])
        for idx, score in k_center_greedy(inp.points, fallback, reference, count):
            repairs.append((idx, f"repair dist={score:.6f}"))
        return repairs


class CowalStrategy(_ClusterStrategy):
    """Highest-entropy frame of every free cluster"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="cowal",
            description=(
                "Cluster with K=|A|+Q, pin labeled frames to their clusters and take the "
                "highest-entropy frame of each free cluster."
            ),
            category=StrategyCategory.CORRELATION,
            needs_entropy=True,
        )

    def _pick(
        self, inp: StrategyInput, members: np.ndarray, centroid: np.ndarray
    ) -> tuple[int, str]:
        entropy = inp.entropies(members)
        best = int(rank_by_entropy(members, entropy)[0])
        return int(members[best]), f"entropy={entropy[best]:.6f}"


class CowalCenterStrategy(_ClusterStrategy):
    """Frame closest to the centroid of every free cluster"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="cowal-center",
            description=(
                "Cluster with K=|A|+Q, pin labeled frames to their clusters and take the "
                "frame nearest each free centroid."
            ),
            category=StrategyCategory.CORRELATION,
        )

    def _pick(
        self, inp: StrategyInput, members: np.ndarray, centroid: np.ndarray
    ) -> tuple[int, str]:
        dist = cdist(inp.points[members], centroid[None, :])[:, 0]
        best = int(np.argmin(dist))
        return int(members[best]), f"dist={dist[best]:.6f}"
