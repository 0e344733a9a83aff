"""Deterministic k-means over sentence embeddings.

k-means++ seeding from an explicit RNG seed, Lloyd iterations to an
assignment fixpoint, and deterministic empty-cluster repair: given the same
(matrix, k, seed) the clustering is identical every run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingMatrix


@dataclass(frozen=True)
class Clustering:
    assignments: dict[str, int]
    centroids: np.ndarray
    inertia: float
    inertia_history: tuple[float, ...] = field(default=())
    n_iter: int = 0

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    def members(self) -> dict[int, list[str]]:
        """Cluster index -> sentence ids, in assignment (corpus) order."""
        out: dict[int, list[str]] = {j: [] for j in range(self.k)}
        for sid, j in self.assignments.items():
            out[j].append(sid)
        return out


def effective_k(requested: int, rows: int) -> int:
    """Clamp the cluster count for small pools so desk-scale runs never
    fail: at most ceil(rows/10), at least 1."""
    return max(1, min(requested, math.ceil(rows / 10)))


def _sq_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centroids.T)
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    closest = _sq_distances(x, x[chosen[0]][None, :])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            chosen[j] = rng.integers(n)
        else:
            chosen[j] = rng.choice(n, p=closest / total)
        d2 = _sq_distances(x, x[chosen[j]][None, :])[:, 0]
        np.minimum(closest, d2, out=closest)
    return x[chosen].copy()


def kmeans(
    matrix: EmbeddingMatrix,
    k: int,
    seed: int = 0,
    max_iters: int = 100,
    metric: str = "sq_euclidean",
) -> Clustering:
    """Lloyd's algorithm with k-means++ initialization.

    ``metric`` is "sq_euclidean" (raw embeddings) or "cosine" (rows are
    L2-normalized first). Empty clusters are repaired by reseeding at the
    point farthest from its assigned centroid.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    n = len(matrix)
    if n == 0:
        raise ValueError("cannot cluster an empty embedding matrix")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of rows ({n})")
    if metric not in ("sq_euclidean", "cosine"):
        raise ValueError(f"unknown metric {metric!r}")

    x = np.asarray(matrix.vectors, dtype=np.float64)
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        x = x / norms

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(x, k, rng)

    assignments = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        d2 = _sq_distances(x, centroids)
        new_assignments = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), new_assignments].sum())
        history.append(inertia)
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments

        # Centroid update: mean of member rows in row order, then repair.
        counts = np.bincount(assignments, minlength=k)
        for j in range(k):
            if counts[j] > 0:
                centroids[j] = x[assignments == j].mean(axis=0)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            own_d2 = _sq_distances(x, centroids)[np.arange(n), assignments]
            taken: set[int] = set()
            for j in empty:
                order = np.argsort(-own_d2, kind="stable")
                pick = next(int(i) for i in order if int(i) not in taken)
                taken.add(pick)
                centroids[j] = x[pick]
                own_d2[pick] = -np.inf

    # Reseeding alone cannot fill a cluster when points coincide exactly, so
    # guarantee the non-empty invariant by reassigning the farthest point of
    # a multi-member cluster to each still-empty cluster. Each move sets the
    # moved point's distance to zero, so inertia never increases here.
    counts = np.bincount(assignments, minlength=k)
    if (counts == 0).any():
        own_d2 = _sq_distances(x, centroids)[np.arange(n), assignments]
        for j in np.flatnonzero(counts == 0):
            eligible = counts[assignments] >= 2
            order = np.argsort(-own_d2, kind="stable")
            pick = next(int(i) for i in order if eligible[i])
            counts[assignments[pick]] -= 1
            assignments[pick] = j
            counts[j] = 1
            centroids[j] = x[pick]
            own_d2[pick] = 0.0
        d2 = _sq_distances(x, centroids)
        history.append(float(d2[np.arange(n), assignments].sum()))

    return Clustering(
        assignments={sid: int(c) for sid, c in zip(matrix.ids, assignments)},
        centroids=centroids,
        inertia=history[-1],
        inertia_history=tuple(history),
        n_iter=n_iter,
    )
