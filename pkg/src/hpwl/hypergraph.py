"""Soft hypergraph over cluster centroids and its Laplacian.

Each centroid is a vertex and also spawns one hyperedge containing itself
and its ``l`` nearest centroids. Membership strengths are Gaussian
affinities, so incidence values lie in (0, 1].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import ConstructionError, HpwlError

logger = logging.getLogger(__name__)


@dataclass
class SoftHypergraph:
    """Incidence structure plus hyperedge weights.

    Attributes
    ----------
    incidence : ndarray of shape (m, m)
        ``incidence[v, e]`` is the membership of vertex ``v`` in hyperedge ``e``.
    weights : ndarray of shape (m,)
        Hyperedge weights, kept on the probability simplex.
    vertex_degrees, edge_degrees : ndarray of shape (m,)
    sigma : float
        Gaussian bandwidth (mean pairwise centroid distance).
    l : int
        Number of neighbours per hyperedge, excluding the centroid itself.
    """

    incidence: np.ndarray
    weights: np.ndarray
    vertex_degrees: Optional[np.ndarray] = None
    edge_degrees: Optional[np.ndarray] = None
    sigma: float = 1.0
    l: int = 1

    @property
    def n_vertices(self) -> int:
        return self.incidence.shape[0]


def pairwise_distances(c: np.ndarray) -> np.ndarray:
    diff = c[:, None, :] - c[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def gaussian_affinity(sq_dist, sigma: float):
    return np.exp(-np.asarray(sq_dist) / sigma**2)


def build_incidence(c: np.ndarray, l: int) -> SoftHypergraph:
    """Soft incidence matrix of the centroid hypergraph.

    Column ``i`` holds ``exp(-|c_i - c_j|^2 / sigma^2)`` for ``j = i`` and
    the ``l`` nearest other centroids (distance ties go to the lower index),
    zero elsewhere. Weights start uniform.
    """
    c = np.asarray(c, dtype=float)
    m = c.shape[0]
    if m < 2:
        raise ConstructionError(f"need at least 2 distinct centroids, got {m}")
    if not 1 <= l <= m - 1:
        raise ValueError(f"l must be in [1, {m - 1}], got {l}")

    dist = pairwise_distances(c)
    sigma = float(dist[np.triu_indices(m, k=1)].mean())
    if sigma <= 0:
        raise ConstructionError(
            "all centroids coincide (sigma = 0); the data needs more variance"
        )

    h = np.zeros((m, m))
    for i in range(m):
        others = [j for j in np.argsort(dist[i], kind="stable") if j != i][:l]
        members = np.array([i, *others])
        h[members, i] = gaussian_affinity(dist[i, members] ** 2, sigma)
    h[np.arange(m), np.arange(m)] = 1.0

    return degrees(SoftHypergraph(h, np.full(m, 1.0 / m), sigma=sigma, l=l))


def binarize(h: SoftHypergraph) -> SoftHypergraph:
    """Ordinary hypergraph with the same membership pattern (nonzero -> 1)."""
    return degrees(replace(h, incidence=(h.incidence != 0).astype(float)))


def degrees(h: SoftHypergraph) -> SoftHypergraph:
    """Fill ``edge_degrees`` (column sums) and ``vertex_degrees`` (weighted row sums)."""
    edge = h.incidence.sum(axis=0)
    if np.any(edge <= 0):
        raise HpwlError("hyperedge with zero degree; incidence columns must be nonzero")
    vertex = h.incidence @ h.weights
    return replace(h, vertex_degrees=vertex, edge_degrees=edge)


def inv_or_zero(v: np.ndarray) -> np.ndarray:
    """Elementwise reciprocal with 0 -> 0 (pseudo-inverse of a diagonal)."""
    out = np.zeros_like(v, dtype=float)
    pos = v > 0
    out[pos] = 1.0 / v[pos]
    return out


def isolated_vertices(h: SoftHypergraph) -> np.ndarray:
    """Vertices whose every hyperedge has weight zero."""
    return np.flatnonzero(h.incidence @ h.weights <= 0)


def propagation(h: SoftHypergraph) -> np.ndarray:
    """``Dv^-1 H W De^-1 H^T``; row-stochastic whenever all vertex degrees are positive."""
    if h.vertex_degrees is None or h.edge_degrees is None:
        h = degrees(h)
    inv_v = inv_or_zero(h.vertex_degrees)
    edge_scale = h.weights / h.edge_degrees
    return inv_v[:, None] * ((h.incidence * edge_scale) @ h.incidence.T)


def laplacian(h: SoftHypergraph) -> np.ndarray:
    """``I - Dv^-1 H W De^-1 H^T`` (not symmetric in general)."""
    return np.eye(h.n_vertices) - propagation(h)


def symmetrize(delta: np.ndarray) -> np.ndarray:
    return 0.5 * (delta + delta.T)


def pairwise_laplacian(h: SoftHypergraph) -> np.ndarray:
    """Laplacian whose trace form equals the weighted pairwise-distance sum.

    With ``A = propagation(h)`` the pairwise coefficients are
    ``alpha[i, j] = A[i, j]`` and
    ``0.5 * sum_ij alpha_ij |y_i - y_j|^2 = tr(Y^T L Y)`` for
    ``L = diag(rowsum(S)) - S``, ``S = (A + A^T) / 2``. This differs from
    :func:`laplacian` unless the column sums of ``A`` are all 1.
    """
    s = symmetrize(propagation(h))
    return np.diag(s.sum(axis=1)) - s


def extend_laplacian(delta: np.ndarray, centroid_indices, n: int) -> np.ndarray:
    """Embed an m x m Laplacian into n x n at the centroid rows/columns."""
    idx = np.asarray(centroid_indices, dtype=int)
    if len(np.unique(idx)) != len(idx):
        raise ValueError("centroid indices must be distinct")
    out = np.zeros((n, n))
    out[np.ix_(idx, idx)] = delta
    return out


def dump_csv(h: SoftHypergraph, directory) -> list[Path]:
    """Write incidence, weights and Laplacian as CSV files for inspection."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {
        "incidence.csv": h.incidence,
        "weights.csv": h.weights[:, None],
        "laplacian.csv": laplacian(h),
    }
    written = []
    for name, arr in files.items():
        path = directory / name
        np.savetxt(path, arr, delimiter=",", fmt="%.17g")
        written.append(path)
    return written
