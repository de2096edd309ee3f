"""k-means with seeded initialisation and snapping of means to data rows."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .dataset import DataMatrix

logger = logging.getLogger(__name__)


@dataclass
class ClusterModel:
    """Output of :func:`kmeans`, optionally completed by :func:`snap_centroids`.

    Attributes
    ----------
    means : ndarray of shape (m, d)
    assignments : ndarray of shape (n,)
        Cluster index of every row.
    centroid_indices : ndarray of shape (m,), optional
        Row of ``X`` closest to each mean.
    centroids : ndarray of shape (m, d), optional
        ``X[centroid_indices]``.
    sse_trace : list of float
        Within-cluster sum of squares after every mean update.
    """

    means: np.ndarray
    assignments: np.ndarray
    centroid_indices: Optional[np.ndarray] = None
    centroids: Optional[np.ndarray] = None
    sse_trace: list = field(default_factory=list)
    n_iter: int = 0

    @property
    def n_clusters(self) -> int:
        return self.means.shape[0]


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, DataMatrix) else np.asarray(x, dtype=float)


def squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(n, m) matrix of squared Euclidean distances, computed by differences.

    Differences rather than the ``|a|^2 - 2ab + |b|^2`` expansion keep exact
    ties exact, which the lowest-index tie-break relies on.
    """
    out = np.empty((x.shape[0], centers.shape[0]))
    for j, c in enumerate(centers):
        diff = x - c
        out[:, j] = np.einsum("ij,ij->i", diff, diff)
    return out


def sse(x, means: np.ndarray, assignments: np.ndarray) -> float:
    x = _values(x)
    diff = x - means[assignments]
    return float(np.einsum("ij,ij->", diff, diff))


def _repair_empty(x, means, assignments, dist):
    """Move the worst-fitting point of a multi-member cluster into each empty one."""
    m = means.shape[0]
    for j in range(m):
        counts = np.bincount(assignments, minlength=m)
        if counts[j] > 0:
            continue
        own = dist[np.arange(len(x)), assignments].copy()
        own[counts[assignments] < 2] = -np.inf
        i = int(np.argmax(own))
        logger.debug("empty cluster %d re-seeded with row %d", j, i)
        assignments[i] = j
        means[j] = x[i]
    return means, assignments


def kmeans(x, m: int, seed: int = 0, max_iter: int = 100) -> ClusterModel:
    """Lloyd's algorithm.

    Initial means are ``m`` distinct rows drawn uniformly with ``seed``.
    Assignment ties go to the lowest cluster index. An empty cluster takes
    over the point lying farthest from its current mean (among clusters that
    keep at least one other member). Iteration stops when assignments no
    longer change or after ``max_iter`` updates.
    """
    x = _values(x)
    n = x.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"number of clusters must be in [1, {n}], got {m}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    rng = np.random.default_rng(seed)
    means = x[np.sort(rng.choice(n, size=m, replace=False))].copy()
    assignments = None
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        dist = squared_distances(x, means)
        new = np.argmin(dist, axis=1)
        means, new = _repair_empty(x, means, new, dist)
        if assignments is not None and np.array_equal(new, assignments):
            break
        assignments = new
        for j in range(m):
            means[j] = x[assignments == j].mean(axis=0)
        trace.append(sse(x, means, assignments))
    return ClusterModel(means=means, assignments=assignments, sse_trace=trace, n_iter=it)


def snap_centroids(x, model: ClusterModel) -> ClusterModel:
    """Replace every mean by its nearest data row.

    Means that land on the same row (or on identical rows) are merged into
    the first of them, so the returned model may have fewer clusters.
    """
    x = _values(x)
    nearest = np.argmin(squared_distances(x, model.means), axis=0)

    keep: list[int] = []
    remap = np.empty(model.n_clusters, dtype=int)
    for j, row in enumerate(nearest):
        for k, kept in enumerate(keep):
            if nearest[kept] == row or np.array_equal(x[nearest[kept]], x[row]):
                remap[j] = k
                break
        else:
            remap[j] = len(keep)
            keep.append(j)
    if len(keep) < model.n_clusters:
        logger.info("merged %d duplicate centroids", model.n_clusters - len(keep))

    idx = nearest[keep]
    return replace(
        model,
        means=model.means[keep].copy(),
        assignments=remap[model.assignments],
        centroid_indices=idx,
        centroids=x[idx].copy(),
    )


def point_model(x) -> ClusterModel:
    """Every distinct row is its own cluster and centroid (duplicates merge)."""
    x = _values(x)
    _, first, inverse = np.unique(x, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    idx = first[order]
    return ClusterModel(
        means=x[idx].copy(),
        assignments=rank[inverse.ravel()],
        centroid_indices=idx,
        centroids=x[idx].copy(),
    )
