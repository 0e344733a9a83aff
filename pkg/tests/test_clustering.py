import numpy as np
import pytest

from corpusforge.clustering import Clustering, effective_k, kmeans
from corpusforge.embeddings import EmbeddingMatrix

from oracles import brute_force_best_2partition


def _matrix(points):
    ids = tuple(str(i) for i in range(len(points)))
    return EmbeddingMatrix(ids, np.asarray(points, dtype=np.float64))


def _partition(clustering: Clustering):
    groups = {}
    for sid, j in clustering.assignments.items():
        groups.setdefault(j, set()).add(int(sid))
    return frozenset(frozenset(g) for g in groups.values())


def test_two_separated_blobs_recovered():
    rng = np.random.default_rng(42)
    blob_a = rng.normal(loc=(0.0, 0.0), scale=0.05, size=(4, 2))
    blob_b = rng.normal(loc=(5.0, 5.0), scale=0.05, size=(4, 2))
    points = np.vstack([blob_a, blob_b])
    clustering = kmeans(_matrix(points), k=2, seed=1)
    expected, _ = brute_force_best_2partition([tuple(p) for p in points])
    assert _partition(clustering) == expected


def test_blobs_match_brute_force_on_random_layouts():
    for seed in range(8):
        rng = np.random.default_rng(seed)
        centers = rng.uniform(-4, 4, size=(2, 2))
        while np.linalg.norm(centers[0] - centers[1]) < 3.0:
            centers = rng.uniform(-4, 4, size=(2, 2))
        points = np.vstack([
            rng.normal(loc=centers[0], scale=0.1, size=(4, 2)),
            rng.normal(loc=centers[1], scale=0.1, size=(3, 2)),
        ])
        clustering = kmeans(_matrix(points), k=2, seed=seed)
        expected, _ = brute_force_best_2partition([tuple(p) for p in points])
        assert _partition(clustering) == expected


def test_k_equals_points_zero_inertia():
    points = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, 3.0]]
    clustering = kmeans(_matrix(points), k=4, seed=0)
    assert clustering.inertia == 0.0
    assert len(set(clustering.assignments.values())) == 4


def test_same_seed_identical():
    rng = np.random.default_rng(7)
    points = rng.uniform(size=(40, 5))
    first = kmeans(_matrix(points), k=6, seed=123)
    second = kmeans(_matrix(points), k=6, seed=123)
    assert first.assignments == second.assignments
    assert np.array_equal(first.centroids, second.centroids)


def test_inertia_non_increasing():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        points = rng.uniform(size=(60, 4))
        clustering = kmeans(_matrix(points), k=5, seed=seed)
        history = clustering.inertia_history
        assert all(history[i + 1] <= history[i] for i in range(len(history) - 1))


def test_translation_invariance():
    rng = np.random.default_rng(3)
    points = rng.uniform(size=(30, 3))
    shifted = points + np.array([3.5, -2.25, 10.0])
    base = kmeans(_matrix(points), k=4, seed=9)
    moved = kmeans(_matrix(shifted), k=4, seed=9)
    assert base.assignments == moved.assignments


def test_duplicate_points_never_leave_empty_clusters():
    points = [[1.0, 1.0]] * 10
    clustering = kmeans(_matrix(points), k=3, seed=0)
    used = set(clustering.assignments.values())
    assert used == {0, 1, 2}


def test_near_duplicate_rows_fill_all_clusters():
    rng = np.random.default_rng(5)
    base = rng.uniform(size=(3, 2))
    points = np.vstack([base[i % 3] for i in range(12)])
    clustering = kmeans(_matrix(points), k=5, seed=2)
    assert set(clustering.assignments.values()) == set(range(5))


def test_k_too_large_rejected():
    with pytest.raises(ValueError):
        kmeans(_matrix([[0.0, 1.0]]), k=2, seed=0)


def test_empty_matrix_rejected():
    with pytest.raises(ValueError):
        kmeans(EmbeddingMatrix((), np.zeros((0, 3))), k=1, seed=0)


def test_cosine_metric_normalizes():
    points = [[1.0, 0.0], [10.0, 0.0], [0.0, 1.0], [0.0, 7.0]]
    clustering = kmeans(_matrix(points), k=2, seed=0, metric="cosine")
    groups = _partition(clustering)
    assert frozenset({0, 1}) in groups and frozenset({2, 3}) in groups


def test_effective_k_clamps_small_pools():
    assert effective_k(1000, 1_000_000) == 1000
    assert effective_k(1000, 500) == 50
    assert effective_k(1000, 5) == 1
    assert effective_k(3, 100) == 3
