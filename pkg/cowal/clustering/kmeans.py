"""
K-Means

k-means++ seeding, Lloyd iterations, and the variant in which a leading
block of centroids stays fixed. Ties in nearest-centroid assignment go to
the lowest centroid index; ties between restarts go to the earliest run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import EmptyInput, KTooLarge, NonFinite, TooFewPoints

logger = logging.getLogger(__name__)

MAX_ITER = 100
TOL = 1e-6

SeedLike = int | np.random.Generator | np.random.SeedSequence | None


def seed_entropy(seed: SeedLike) -> int | None:
    """Collapse any seed form into SeedSequence entropy"""
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(2**63))
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1, dtype=np.uint64)[0])
    return seed


@dataclass(frozen=True)
class ClusterResult:
    """Final centroids, assignment and the inertia trace of one k-means run"""

    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    iterations: int
    inertia_history: tuple[float, ...] = ()
    n_fixed: int = 0

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    def members(self, cluster: int) -> np.ndarray:
        """Point indices assigned to one cluster, ascending"""
        return np.flatnonzero(self.assignment == cluster)


def as_points(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] == 0:
        raise EmptyInput("no points to cluster")
    return points


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = cdist(points, centroids, metric="sqeuclidean")
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(points)), labels]


def _update(
    points: np.ndarray,
    labels: np.ndarray,
    dists: np.ndarray,
    centroids: np.ndarray,
    n_fixed: int,
) -> np.ndarray:
    k = len(centroids)
    new = centroids.copy()
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros_like(centroids)
    np.add.at(sums, labels, points)

    free = np.arange(n_fixed, k)
    filled = free[counts[free] > 0]
    new[filled] = sums[filled] / counts[filled, None]

    empty = free[counts[free] == 0]
    if empty.size:
        far = dists.copy()
        for cluster in empty:
            idx = int(np.argmax(far))
            new[cluster] = points[idx]
            far[idx] = -1.0
            logger.debug("reseeded empty cluster %d at point %d", cluster, idx)
    return new


def _lloyd(
    points: np.ndarray, centroids: np.ndarray, n_fixed: int, max_iter: int, tol: float
) -> ClusterResult:
    if not np.all(np.isfinite(centroids)):
        raise NonFinite("initial centroids must be finite")

    labels, dists = _assign(points, centroids)
    inertia = float(dists.sum())
    history = [inertia]
    iterations = 0

    for _ in range(max_iter):
        centroids = _update(points, labels, dists, centroids, n_fixed)
        labels, dists = _assign(points, centroids)
        previous, inertia = inertia, float(dists.sum())
        history.append(inertia)
        iterations += 1
        if previous == 0.0 or (previous - inertia) < tol * previous:
            break

    logger.debug("k-means (K=%d, fixed=%d) stopped after %d iterations, inertia %.6g",
                 len(centroids), n_fixed, iterations, inertia)
    return ClusterResult(
        centroids=centroids,
        assignment=labels,
        inertia=inertia,
        iterations=iterations,
        inertia_history=tuple(history),
        n_fixed=n_fixed,
    )


def kmeanspp_init(
    points: np.ndarray, k: int, seed: SeedLike = None, fixed: np.ndarray | None = None
) -> np.ndarray:
    """
    k-means++ seeding

    Args:
        points: (n, d) array
        k: Number of centroids, 1 <= k <= n
        seed: Seed or generator
        fixed: Centroids already in place. When given, every new centroid is
            drawn by squared distance to the nearest fixed or chosen one

    Returns:
        (k, d) centroids drawn from distinct points; the first uniformly
        (unless fixed centroids exist), the rest with probability
        proportional to squared distance to the nearest centroid so far
    """
    points = as_points(points)
    n = len(points)
    if not 1 <= k <= n:
        raise KTooLarge(f"cannot seed {k} centroids from {n} points")
    rng = np.random.default_rng(seed)

    chosen: list[int] = []
    if fixed is not None and len(fixed):
        fixed = np.asarray(fixed, dtype=np.float64).reshape(-1, points.shape[1])
        closest = cdist(points, fixed, metric="sqeuclidean").min(axis=1)
    else:
        chosen.append(int(rng.integers(n)))
        closest = cdist(points, points[chosen[0]][None, :], metric="sqeuclidean")[:, 0]
    while len(chosen) < k:
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # every point coincides with a fixed or chosen centroid
            idx = int(rng.choice(np.setdiff1d(np.arange(n), chosen)))
        chosen.append(idx)
        closest = np.minimum(
            closest, cdist(points, points[idx][None, :], metric="sqeuclidean")[:, 0]
        )
    return points[chosen].copy()


def lloyd_kmeans(
    points: np.ndarray,
    init_centroids: np.ndarray,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
) -> ClusterResult:
    """
    Lloyd's k-means from given initial centroids

    Stops when the relative inertia change drops below tol or after max_iter
    updates. Empty clusters are reseeded at the point farthest from its centroid.
    """
    points = as_points(points)
    centroids = np.asarray(init_centroids, dtype=np.float64).reshape(-1, points.shape[1])
    if len(centroids) > len(points):
        raise TooFewPoints(f"{len(points)} points for {len(centroids)} centroids")
    return _lloyd(points, centroids.copy(), n_fixed=0, max_iter=max_iter, tol=tol)


def constrained_kmeans(
    points: np.ndarray,
    fixed_centroids: np.ndarray,
    free_init: np.ndarray,
    max_iter: int = MAX_ITER,
    tol: float = TOL,
    seed: SeedLike = None,
    restarts: int = 1,
) -> ClusterResult:
    """
    k-means in which the fixed centroids never move

    Output centroid rows are the fixed ones first (unchanged), then the free
    ones. Points always go to the globally nearest centroid, fixed or free.

    The first run starts from free_init. Each further restart (restarts - 1
    of them) draws the free centroids by k-means++ around the fixed ones;
    the run with the lowest inertia is returned.
    """
    points = as_points(points)
    dims = points.shape[1]
    fixed = np.asarray(fixed_centroids, dtype=np.float64).reshape(-1, dims)
    free = np.asarray(free_init, dtype=np.float64).reshape(-1, dims)
    centroids = np.concatenate([fixed, free], axis=0)
    if len(centroids) == 0:
        raise EmptyInput("no centroids")
    if len(points) < len(centroids):
        raise TooFewPoints(f"{len(points)} points for {len(centroids)} centroids")
    best = _lloyd(points, centroids, n_fixed=len(fixed), max_iter=max_iter, tol=tol)
    if restarts <= 1 or len(free) == 0:
        return best

    for child in np.random.SeedSequence(seed_entropy(seed)).spawn(restarts - 1):
        init = np.concatenate([fixed, kmeanspp_init(points, len(free), child, fixed)], axis=0)
        result = _lloyd(points, init, n_fixed=len(fixed), max_iter=max_iter, tol=tol)
        if result.inertia < best.inertia:
            best = result
    logger.debug("constrained k-means: best inertia %.6g over %d restarts", best.inertia, restarts)
    return best
