"""
Diversity Strategies

Greedy k-center (CoreSet), entropy-scaled k-center, and suggestive
annotation (entropy shortlist followed by similarity coverage)
"""

from typing import List, Optional

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ZeroVector
from .base import Strategy, StrategyCategory, StrategyInput, StrategyMetadata
from .uncertainty import rank_by_entropy


def k_center_greedy(
    points: np.ndarray,
    pool: np.ndarray,
    reference: np.ndarray,
    budget: int,
    weights: Optional[np.ndarray] = None,
) -> List[tuple[int, float]]:
    """
    Greedy k-center selection with in-batch updates

    Args:
        points: (n, d) embeddings by global index
        pool: Candidate global indices, ascending
        reference: Global indices already covered (labeled set)
        budget: Number of picks
        weights: Optional per-candidate multiplier of the distance

    Returns:
        (global index, score) per pick; ties go to the lower index
    """
    if len(reference):
        mins = cdist(points[reference], points[pool]).min(axis=0)
    else:
        mins = np.full(len(pool), np.inf)
    taken = np.zeros(len(pool), dtype=bool)

    picks = []
    for _ in range(budget):
        if np.isinf(mins).all():
            # nothing covered yet
            score = weights.copy() if weights is not None else np.zeros(len(pool))
        else:
            score = mins * weights if weights is not None else mins.copy()
        score[taken] = -np.inf
        j = int(np.argmax(score))
        taken[j] = True
        picks.append((int(pool[j]), float(score[j])))
        mins = np.minimum(mins, cdist(points[pool[j]][None, :], points[pool])[0])
    return picks


class CoreSetStrategy(Strategy):
    """Farthest-first traversal of the embedding space"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="coreset",
            description="Repeatedly pick the frame farthest from the labeled and picked frames.",
            category=StrategyCategory.DIVERSITY,
        )

    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        picks = k_center_greedy(inp.points, inp.unlabeled_idx, inp.labeled_idx, inp.budget)
        return [(idx, f"dist={score:.6f}") for idx, score in picks]


class CoreSetEntropyStrategy(Strategy):
    """k-center distance scaled by frame entropy"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="coreset-x-entropy",
            description="CoreSet with every distance multiplied by the frame's entropy.",
            category=StrategyCategory.DIVERSITY,
            needs_entropy=True,
        )

    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        pool = inp.unlabeled_idx
        picks = k_center_greedy(
            inp.points, pool, inp.labeled_idx, inp.budget, weights=inp.entropies(pool)
        )
        return [(idx, f"scaled_dist={score:.6f}") for idx, score in picks]


class SuggestiveStrategy(Strategy):
    """Top-2Q entropy shortlist, then greedy maximum similarity coverage of the pool"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="suggestive",
            description=(
                "Shortlist the 2Q highest-entropy frames, then greedily pick those that "
                "best cover the unlabeled pool by cosine similarity."
            ),
            category=StrategyCategory.DIVERSITY,
            needs_entropy=True,
        )

    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        pool = inp.unlabeled_idx
        entropy = inp.entropies(pool)
        shortlist = pool[rank_by_entropy(pool, entropy)[: 2 * inp.budget]]

        vectors = inp.points[pool]
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms == 0):
            raise ZeroVector("suggestive annotation needs nonzero embeddings")
        unit = vectors / norms[:, None]
        position = {int(g): i for i, g in enumerate(pool)}
        sim = unit @ unit[[position[int(s)] for s in shortlist]].T

        covered: Optional[np.ndarray] = None
        taken = np.zeros(len(shortlist), dtype=bool)
        picks = []
        for _ in range(inp.budget):
            if covered is None:
                gains = sim.sum(axis=0)
            else:
                gains = np.maximum(sim, covered[:, None]).sum(axis=0) - covered.sum()
            gains[taken] = -np.inf
            j = int(np.argmax(gains))
            taken[j] = True
            covered = sim[:, j].copy() if covered is None else np.maximum(covered, sim[:, j])
            picks.append((int(shortlist[j]), f"coverage_gain={gains[j]:.6f}"))
        return picks
