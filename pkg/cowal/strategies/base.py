"""
Strategy Registry & Selection Contract

Central registry for all annotation strategies. Every strategy maps
(unlabeled pool, labeled set) to exactly Q distinct unlabeled frames.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..clustering.kmeans import MAX_ITER, TOL
from ..data.types import ALState, DatasetManifest, EmbeddingMatrix, FrameRef
from ..errors import BudgetExceedsPool, MissingScores, SelectionError, UnknownStrategyError
from ..scoring import FrameScore

logger = logging.getLogger(__name__)


class StrategyCategory(str, Enum):
    """Strategy categories"""

    BASELINE = "baseline"
    UNCERTAINTY = "uncertainty"
    DIVERSITY = "diversity"
    CORRELATION = "correlation"


@dataclass
class StrategyMetadata:
    """Metadata about a strategy"""

    name: str
    description: str
    category: StrategyCategory
    needs_entropy: bool = False


@dataclass(frozen=True)
class StrategyInput:
    """Everything a strategy may look at"""

    manifest: DatasetManifest
    embeddings: EmbeddingMatrix | np.ndarray
    state: ALState
    budget: int
    seed: int = 0
    frame_entropies: Sequence[FrameScore] = ()
    restarts: int = 2
    max_iter: int = MAX_ITER
    tol: float = TOL

    @cached_property
    def points(self) -> np.ndarray:
        """Embedding rows as float64, indexed by global frame index"""
        data = self.embeddings
        if isinstance(data, EmbeddingMatrix):
            data = data.data
        data = np.asarray(data, dtype=np.float64)
        return data[:, None] if data.ndim == 1 else data

    @cached_property
    def labeled_idx(self) -> np.ndarray:
        """Global indices of labeled frames, in state order"""
        return np.array([self.manifest.global_index(f) for f in self.state.labeled], dtype=np.int64)

    @cached_property
    def unlabeled_idx(self) -> np.ndarray:
        """Global indices of unlabeled frames, ascending"""
        return np.sort(
            np.array([self.manifest.global_index(f) for f in self.state.unlabeled], dtype=np.int64)
        )

    @cached_property
    def _entropy_table(self) -> np.ndarray:
        table = np.full(self.manifest.total_frames, np.nan)
        for score in self.frame_entropies:
            table[self.manifest.global_index(score.frame)] = score.value
        return table

    @property
    def has_entropies(self) -> bool:
        return bool(np.all(np.isfinite(self._entropy_table[self.unlabeled_idx])))

    def entropies(self, idx: np.ndarray) -> np.ndarray:
        """Entropy scores for global indices"""
        values = self._entropy_table[idx]
        missing = np.flatnonzero(np.isnan(values))
        if missing.size:
            frame = self.manifest.frame_ref(int(idx[missing[0]]))
            raise MissingScores(f"no entropy score for frame {frame} ({missing.size} missing)")
        return values


@dataclass(frozen=True)
class Selection:
    """Frames chosen for annotation, with one diagnostic string each"""

    frames: tuple[FrameRef, ...]
    reasons: tuple[str, ...] = field(default=())

    def lines(self) -> List[str]:
        """`video_id,frame_idx,reason` lines"""
        return [f"{f.video_id},{f.frame_idx},{r}" for f, r in zip(self.frames, self.reasons)]


class Strategy(ABC):
    """Abstract base class for annotation strategies"""

    def __init__(self):
        self.metadata = self._define_metadata()

    @abstractmethod
    def _define_metadata(self) -> StrategyMetadata:
        """Define strategy metadata"""
        pass

    @abstractmethod
    def _select(self, inp: StrategyInput) -> List[tuple[int, str]]:
        """
        Choose frames

        Args:
            inp: Validated strategy input

        Returns:
            (global frame index, reason) per pick, exactly inp.budget of them
        """
        pass

    def select(self, inp: StrategyInput) -> Selection:
        """
        Run the strategy under the shared contract

        Raises:
            BudgetExceedsPool: Budget below 1 or above the unlabeled pool size
            MissingScores: Strategy needs entropy scores that are missing
            SelectionError: Strategy broke the contract
        """
        pool = inp.unlabeled_idx
        if inp.budget < 1 or inp.budget > len(pool):
            raise BudgetExceedsPool(
                f"{self.metadata.name}: budget {inp.budget} for a pool of {len(pool)} frames"
            )
        if self.metadata.needs_entropy:
            inp.entropies(pool)

        picks = self._select(inp)
        chosen = [idx for idx, _ in picks]
        if len(chosen) != inp.budget or len(set(chosen)) != len(chosen):
            raise SelectionError(f"{self.metadata.name} returned {len(chosen)} picks")
        if not np.all(np.isin(chosen, pool)):
            raise SelectionError(f"{self.metadata.name} picked a frame outside the pool")

        logger.debug("%s selected %s", self.metadata.name, chosen)
        return Selection(
            frames=tuple(inp.manifest.frame_ref(idx) for idx in chosen),
            reasons=tuple(reason for _, reason in picks),
        )


class StrategyRegistry:
    """Central registry for all strategies"""

    def __init__(self):
        self._strategies: Dict[str, Strategy] = {}

    def register(self, strategy: Strategy) -> None:
        """Register a strategy"""
        self._strategies[strategy.metadata.name] = strategy

    def list_strategies(self) -> List[str]:
        """List all registered strategy names"""
        return list(self._strategies.keys())

    def list_strategies_by_category(self, category: StrategyCategory) -> List[str]:
        """List strategies in a specific category"""
        return [
            name
            for name, strategy in self._strategies.items()
            if strategy.metadata.category == category
        ]

    def _find_similar(self, name: str, max_suggestions: int = 3) -> List[str]:
        """
        Find similar strategy names using fuzzy string matching

        Args:
            name: The name that wasn't found
            max_suggestions: Maximum number of suggestions to return

        Returns:
            List of similar names, most similar first
        """
        similarities = []
        for available in self._strategies.keys():
            ratio = SequenceMatcher(None, name.lower(), available.lower()).ratio()
            # Boost substring matches
            if name.lower() in available.lower() or available.lower() in name.lower():
                ratio += 0.3
            similarities.append((available, ratio))

        similarities.sort(key=lambda x: x[1], reverse=True)
        return [n for n, score in similarities[:max_suggestions] if score > 0.4]

    def get(self, name: str) -> Strategy:
        """
        Get a strategy by name

        Raises:
            UnknownStrategyError: Name is not registered; message lists close matches
        """
        strategy = self._strategies.get(name)
        if strategy is not None:
            return strategy

        message = f"Strategy '{name}' does not exist."
        suggestions = self._find_similar(name)
        if suggestions:
            message += f" Did you mean: {', '.join(suggestions)}?"
        else:
            message += f" Available: {', '.join(self.list_strategies())}"
        raise UnknownStrategyError(message)


# Global registry instance
_registry: Optional[StrategyRegistry] = None


def get_registry() -> StrategyRegistry:
    """Get the global strategy registry with all built-in strategies"""
    global _registry
    if _registry is None:
        _registry = StrategyRegistry()
        from . import register_all_strategies

        register_all_strategies(_registry)
    return _registry


def reset_registry() -> None:
    """Reset the global strategy registry"""
    global _registry
    _registry = None
