"""k-means variants, centroid matching and the full clustering pipeline"""

import itertools

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from cowal.clustering import (
    best_of_restarts,
    constrained_kmeans,
    full_cowal_clustering,
    kmeanspp_init,
    lloyd_kmeans,
    match_centroids,
)
from cowal.errors import BudgetExceedsPool, KTooLarge, TooFewCentroids, TooFewPoints


def transcribed_matching(a: np.ndarray, k: np.ndarray) -> set[tuple[int, int]]:
    """Greedy matching written out loop by loop"""
    d = [[float(np.linalg.norm(a[i] - k[j])) for j in range(len(k))] for i in range(len(a))]
    visit_order = sorted(range(len(a)), key=lambda i: (min(d[i]), i))
    matches, assigned = set(), set()
    for i in visit_order:
        for j in sorted(range(len(k)), key=lambda j: (d[i][j], j)):
            if j not in assigned:
                assigned.add(j)
                matches.add((i, j))
                break
    return matches


def optimal_constrained_inertia(points: np.ndarray, fixed: np.ndarray, n_free: int) -> float:
    """Exhaustive minimum over every assignment of points to fixed and free clusters"""
    n_fixed = len(fixed)
    k = n_fixed + n_free
    labels = np.array(list(itertools.product(range(k), repeat=len(points))))
    onehot = (labels[:, :, None] == np.arange(k)).astype(np.float64)
    fixed_d2 = cdist(points, fixed, "sqeuclidean") if n_fixed else np.zeros((len(points), 0))
    fixed_cost = np.einsum("lnc,nc->l", onehot[:, :, :n_fixed], fixed_d2)
    free = onehot[:, :, n_fixed:]
    counts = free.sum(axis=1)
    sums = np.einsum("lnc,nd->lcd", free, points)
    squares = np.einsum("lnc,n->lc", free, (points**2).sum(axis=1))
    spread = squares - (sums**2).sum(axis=2) / np.maximum(counts, 1)
    return float((fixed_cost + spread.sum(axis=1)).min())


class TestKMeansPlusPlus:
    def test_single_point(self):
        np.testing.assert_array_equal(kmeanspp_init(np.array([[2.0, 3.0]]), 1, 0), [[2.0, 3.0]])

    def test_two_points_both_chosen(self):
        centroids = kmeanspp_init(np.array([0.0, 10.0]), 2, 7)
        assert sorted(centroids[:, 0]) == [0.0, 10.0]

    def test_deterministic(self):
        points = np.random.default_rng(0).normal(size=(100, 3))
        np.testing.assert_array_equal(kmeanspp_init(points, 5, 11), kmeanspp_init(points, 5, 11))

    def test_too_many_centroids(self):
        with pytest.raises(KTooLarge):
            kmeanspp_init(np.zeros((3, 2)), 4, 0)

    def test_coincident_points(self):
        centroids = kmeanspp_init(np.zeros((4, 2)), 3, 0)
        assert centroids.shape == (3, 2)

    def test_fixed_centroids_are_avoided(self):
        for seed in range(10):
            centroids = kmeanspp_init(np.array([0.0, 10.0]), 1, seed, fixed=np.array([[0.0]]))
            assert centroids[0, 0] == 10.0


class TestLloyd:
    def test_two_clusters(self):
        result = lloyd_kmeans(np.array([0.0, 1.0, 10.0, 11.0]), np.array([0.0, 1.0]))
        assert sorted(result.centroids[:, 0]) == [0.5, 10.5]
        assert result.inertia == pytest.approx(1.0)

    def test_one_centroid_per_point(self):
        points = np.array([[0.0, 0.0], [1.0, 2.0], [5.0, 5.0]])
        result = lloyd_kmeans(points, points.copy())
        assert result.inertia == 0.0
        np.testing.assert_array_equal(result.assignment, [0, 1, 2])

    def test_single_point(self):
        result = lloyd_kmeans(np.array([[4.0, 2.0]]), np.array([[0.0, 0.0]]))
        np.testing.assert_array_equal(result.centroids, [[4.0, 2.0]])
        assert result.inertia == 0.0

    def test_inertia_never_increases(self):
        rng = np.random.default_rng(2)
        for seed in range(20):
            points = rng.normal(size=(40, 2))
            result = lloyd_kmeans(points, kmeanspp_init(points, 4, seed))
            history = np.array(result.inertia_history)
            assert np.all(np.diff(history) <= 1e-9 * history[:-1])

    def test_empty_cluster_is_reseeded(self):
        points = np.array([0.0, 0.1, 0.2, 10.0])
        result = lloyd_kmeans(points, np.array([0.1, 100.0]))
        assert 10.0 in result.centroids[:, 0]

    def test_ties_go_to_lower_centroid(self):
        result = lloyd_kmeans(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0]), max_iter=0)
        np.testing.assert_array_equal(result.assignment, [0, 0, 1])

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            lloyd_kmeans(np.array([0.0]), np.array([0.0, 1.0]))

    @pytest.mark.slow
    def test_restarts_reach_exhaustive_optimum(self):
        rng = np.random.default_rng(5)
        hits, trials = 0, 0
        for seed in range(300):
            n = int(rng.integers(3, 9))
            k = int(rng.integers(1, 4))
            points = rng.normal(size=(n, 2))
            optimum = optimal_constrained_inertia(points, np.zeros((0, 2)), k)
            best = best_of_restarts(points, k, seed, restarts=5).inertia
            assert best >= optimum - 1e-9
            hits += best <= optimum * (1 + 1e-6) + 1e-9
            trials += 1
        assert hits >= 0.95 * trials


class TestMatching:
    def test_example(self):
        m = match_centroids(np.array([0.0, 5.0]), np.array([0.2, 4.0, 9.0]))
        assert m.pairs == ((0, 0), (1, 1))
        assert m.unmatched_centroids == (2,)

    def test_exact_match(self):
        m = match_centroids(np.array([[1.0, 2.0]]), np.array([[1.0, 2.0], [3.0, 3.0]]))
        assert m.pairs == ((0, 0),)
        assert m.unmatched_centroids == (1,)

    def test_greedy_order_is_kept(self):
        m = match_centroids(np.array([0.0, 0.1]), np.array([0.05, 50.0, 60.0]))
        assert m.pairs == ((0, 0), (1, 1))

    def test_no_labeled(self):
        m = match_centroids(np.zeros((0, 2)), np.ones((3, 2)))
        assert m.pairs == () and m.unmatched_centroids == (0, 1, 2)

    def test_too_few_centroids(self):
        with pytest.raises(TooFewCentroids):
            match_centroids(np.zeros((3, 1)), np.zeros((2, 1)))

    def test_matches_transcription_on_random_instances(self):
        rng = np.random.default_rng(12)
        for _ in range(1000):
            n_a, q = int(rng.integers(0, 21)), int(rng.integers(1, 11))
            d = int(rng.integers(1, 17))
            a = rng.normal(size=(n_a, d))
            k = rng.normal(size=(n_a + q, d))
            m = match_centroids(a, k)
            assert set(m.pairs) == transcribed_matching(a, k)
            assert len(m.unmatched_centroids) == q


class TestConstrained:
    def test_example(self):
        result = constrained_kmeans(np.array([0.0, 1.0, 10.0, 11.0]), [0.0], [7.0])
        assert result.centroids[0, 0] == 0.0
        assert result.centroids[1, 0] == pytest.approx(10.5)
        np.testing.assert_array_equal(result.assignment, [0, 0, 1, 1])

    def test_free_already_optimal(self):
        points = np.array([10.0, 11.0])
        result = constrained_kmeans(points, [-50.0], [10.5])
        assert result.centroids[1, 0] == 10.5
        assert result.centroids[0, 0] == -50.0

    def test_coincident_points(self):
        result = constrained_kmeans(np.zeros((3, 2)), np.zeros((1, 2)), np.ones((1, 2)))
        assert result.inertia == 0.0
        np.testing.assert_array_equal(result.centroids[1], [0.0, 0.0])

    def test_fixed_unchanged_and_inertia_monotone(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            n = int(rng.integers(4, 30))
            points = rng.normal(size=(n, 2))
            n_fixed = int(rng.integers(0, min(4, n - 1)))
            n_free = int(rng.integers(1, min(4, n - n_fixed) + 1))
            fixed = rng.normal(size=(n_fixed, 2))
            free = points[rng.choice(n, n_free, replace=False)]
            result = constrained_kmeans(points, fixed, free)
            assert np.array_equal(result.centroids[:n_fixed], fixed)
            history = np.array(result.inertia_history)
            assert np.all(np.diff(history) <= 1e-9 * history[:-1])

    def test_restarts_never_hurt(self):
        rng = np.random.default_rng(9)
        for seed in range(50):
            points = rng.normal(size=(int(rng.integers(6, 30)), 2))
            fixed = rng.normal(size=(int(rng.integers(0, 3)), 2))
            free = points[:2]
            single = constrained_kmeans(points, fixed, free)
            many = constrained_kmeans(points, fixed, free, seed=seed, restarts=4)
            again = constrained_kmeans(points, fixed, free, seed=seed, restarts=4)
            assert many.inertia <= single.inertia
            assert np.array_equal(many.centroids, again.centroids)
            assert np.array_equal(many.centroids[: len(fixed)], fixed)

    @pytest.mark.slow
    def test_reaches_exhaustive_optimum(self):
        rng = np.random.default_rng(8)
        hits, trials = 0, 0
        for seed in range(300):
            n = int(rng.integers(3, 9))
            n_fixed = int(rng.integers(0, 3))
            n_free = int(rng.integers(1, 4 - n_fixed))
            points = rng.normal(size=(n, 2))
            fixed = rng.normal(size=(n_fixed, 2))
            optimum = optimal_constrained_inertia(points, fixed, n_free)
            init = kmeanspp_init(points, n_free, seed, fixed=fixed)
            best = constrained_kmeans(points, fixed, init, seed=seed, restarts=5).inertia
            assert best >= optimum - 1e-9
            hits += best <= optimum * (1 + 1e-6) + 1e-9
            trials += 1
        assert hits >= 0.95 * trials


class TestPipeline:
    def test_example(self):
        points = np.array([0.0, 0.1, 5.0, 5.2, 9.0])
        result, matching = full_cowal_clustering(points, [0], 2, seed=0)
        assert result.centroids[0, 0] == 0.0
        assert sorted(np.round(result.centroids[1:, 0], 6)) == [5.1, 9.0]
        groups = {tuple(result.members(c)) for c in range(3)}
        assert groups == {(0, 1), (2, 3), (4,)}
        assert len(matching.pairs) == 1

    def test_without_labeled_frames(self):
        points = np.random.default_rng(0).normal(size=(20, 2))
        result, matching = full_cowal_clustering(points, [], 3, seed=1)
        assert result.k == 3 and result.n_fixed == 0
        assert matching.pairs == ()

    def test_separated_unlabeled_get_own_clusters(self):
        points = np.array([0.0, 100.0, 200.0, 300.0])
        result, _ = full_cowal_clustering(points, [0], 3, seed=2)
        assert sorted(len(result.members(c)) for c in range(1, 4)) == [1, 1, 1]
        assert list(result.members(0)) == [0]

    def test_budget_larger_than_pool(self):
        with pytest.raises(BudgetExceedsPool):
            full_cowal_clustering(np.array([0.0, 1.0]), [0], 2, seed=0)
