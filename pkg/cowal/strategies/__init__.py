"""
Annotation Strategies

Every strategy maps (unlabeled pool, labeled set) to a batch of Q frames.
"""

from .base import (
    Selection,
    Strategy,
    StrategyCategory,
    StrategyInput,
    StrategyMetadata,
    StrategyRegistry,
    get_registry,
    reset_registry,
)
from .baseline import RandomStrategy, TemporalCoverageStrategy
from .cowal import CowalCenterStrategy, CowalStrategy
from .diversity import CoreSetEntropyStrategy, CoreSetStrategy, SuggestiveStrategy, k_center_greedy
from .uncertainty import EntropyStrategy, rank_by_entropy

STRATEGY_NAMES = (
    "random",
    "temporal",
    "entropy",
    "coreset",
    "coreset-x-entropy",
    "suggestive",
    "cowal-center",
    "cowal",
)


def register_all_strategies(registry: StrategyRegistry) -> None:
    """Register all built-in strategies"""
    registry.register(RandomStrategy())
    registry.register(TemporalCoverageStrategy())
    registry.register(EntropyStrategy())
    registry.register(CoreSetStrategy())
    registry.register(CoreSetEntropyStrategy())
    registry.register(SuggestiveStrategy())
    registry.register(CowalCenterStrategy())
    registry.register(CowalStrategy())


__all__ = [
    "STRATEGY_NAMES",
    "CoreSetEntropyStrategy",
    "CoreSetStrategy",
    "CowalCenterStrategy",
    "CowalStrategy",
    "EntropyStrategy",
    "RandomStrategy",
    "Selection",
    "Strategy",
    "StrategyCategory",
    "StrategyInput",
    "StrategyMetadata",
    "StrategyRegistry",
    "SuggestiveStrategy",
    "TemporalCoverageStrategy",
    "get_registry",
    "k_center_greedy",
    "rank_by_entropy",
    "register_all_strategies",
    "reset_registry",
]
