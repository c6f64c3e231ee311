"""
Uncertainty Strategies

Top-Q frame entropy
"""

from typing import List

import numpy as np

from .base import Strategy, StrategyCategory, StrategyInput, StrategyMetadata


def rank_by_entropy(idx: np.ndarray, entropy: np.ndarray) -> np.ndarray:
    """Positions into idx ordered by descending entropy, ties to the lower global index"""
    return np.lexsort((idx, -entropy))


class EntropyStrategy(Strategy):
    """Highest frame entropy first"""

    def _define_metadata(self) -> StrategyMetadata:
        return StrategyMetadata(
            name="entropy",
            description="Select the Q unlabeled frames with the highest frame entropy.",
            category=StrategyCategory.UNCERTAINTY,
            needs_entropy=True,
        )

    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        pool = inp.unlabeled_idx
        entropy = inp.entropies(pool)
        order = rank_by_entropy(pool, entropy)[: inp.budget]
        return [(int(pool[p]), f"entropy={entropy[p]:.6f}") for p in order]
