"""
Centroid Matching

Greedy pairing of labeled embeddings with k-means centroids. Labeled
embeddings are visited by their distance to the closest centroid; each
takes its nearest centroid that is still free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import TooFewCentroids


@dataclass(frozen=True)
class Matching:
    """Labeled-to-centroid pairs, ordered by labeled index, and the centroids left over"""

    pairs: tuple[tuple[int, int], ...]
    unmatched_centroids: tuple[int, ...]

    @property
    def matched_centroids(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.pairs)


def match_centroids(labeled_emb: np.ndarray, centroids: np.ndarray) -> Matching:
    """
    Match every labeled embedding to a distinct centroid

    Args:
        labeled_emb: (|A|, d) embeddings of labeled frames
        centroids: (K, d) centroids, K >= |A|

    Returns:
        Matching with |A| pairs and K - |A| unmatched centroids
    """
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.ndim == 1:
        centroids = centroids[:, None]
    k = len(centroids)
    labeled = np.asarray(labeled_emb, dtype=np.float64).reshape(-1, centroids.shape[1])
    if len(labeled) > k:
        raise TooFewCentroids(f"{len(labeled)} labeled embeddings but only {k} centroids")
    if len(labeled) == 0:
        return Matching(pairs=(), unmatched_centroids=tuple(range(k)))

    d = cdist(labeled, centroids)
    visit = np.argsort(d.min(axis=1), kind="stable")
    taken = np.zeros(k, dtype=bool)
    pairs = []
    for i in visit:
        for j in np.argsort(d[i], kind="stable"):
            if not taken[j]:
                taken[j] = True
                pairs.append((int(i), int(j)))
                break

    return Matching(
        pairs=tuple(sorted(pairs)),
        unmatched_centroids=tuple(int(j) for j in np.flatnonzero(~taken)),
    )
