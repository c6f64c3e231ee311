"""
COWAL Clustering Pipeline

k-means with K = |A| + Q over all frames, matching of labeled frames to
centroids, substitution of matched centroids by the labeled embeddings and
a second k-means round that only moves the Q unmatched centroids. Both
rounds are restarted; the second starts once from the unmatched centroids
and then from k-means++ draws around the labeled embeddings.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from ..errors import BudgetExceedsPool
from .kmeans import (
    MAX_ITER,
    TOL,
    ClusterResult,
    SeedLike,
    as_points,
    constrained_kmeans,
    kmeanspp_init,
    lloyd_kmeans,
    seed_entropy,
)
from .matching import Matching, match_centroids

logger = logging.getLogger(__name__)

RESTARTS = 2


def best_of_restarts(
    points: np.ndarray,
    k: int,
    seed: SeedLike,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
) -> ClusterResult:
    """Run k-means++ / Lloyd several times and keep the lowest inertia (first wins ties)"""
    best: ClusterResult | None = None
    for child in np.random.SeedSequence(seed_entropy(seed)).spawn(max(1, restarts)):
        result = lloyd_kmeans(points, kmeanspp_init(points, k, child), max_iter, tol)
        if best is None or result.inertia < best.inertia:
            best = result
    assert best is not None
    return best


def full_cowal_clustering(
    points: np.ndarray,
    labeled: Sequence[int],
    q: int,
    seed: SeedLike,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
) -> tuple[ClusterResult, Matching]:
    """
    Cluster all frames so that labeled frames pin their own clusters

    Args:
        points: (n, d) embeddings of labeled and unlabeled frames
        labeled: Row indices into points of the labeled frames
        q: Number of free clusters to produce
        seed: Seed for the k-means++ restarts of both rounds
        restarts: Runs per round; the lowest inertia is kept

    Returns:
        (final clustering, matching). Final centroid rows are the labeled
        embeddings in the order of `labeled`, then the q free centroids.
    """
    points = as_points(points)
    labeled = [int(i) for i in labeled]
    n_unlabeled = len(points) - len(set(labeled))
    if q < 1 or n_unlabeled < q:
        raise BudgetExceedsPool(
            f"cannot form {q} free clusters from {n_unlabeled} unlabeled frames"
        )

    k = len(labeled) + q
    first_seq, second_seq = np.random.SeedSequence(seed_entropy(seed)).spawn(2)
    first = best_of_restarts(points, k, first_seq, restarts, max_iter, tol)
    labeled_emb = points[labeled]
    matching = match_centroids(labeled_emb, first.centroids)
    free_init = first.centroids[list(matching.unmatched_centroids)]
    logger.debug(
        "first round K=%d inertia %.6g; %d centroids matched, %d free",
        k,
        first.inertia,
        len(matching.pairs),
        len(matching.unmatched_centroids),
    )

    final = constrained_kmeans(
        points, labeled_emb, free_init, max_iter, tol, seed=second_seq, restarts=restarts
    )
    return final, matching
