"""Neighbor graphs (k-NN and radius ball) and heat-kernel weight matrices."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected graph on ``n`` vertices stored as a dense boolean adjacency.

    The diagonal is always False.
    """

    n: int
    adjacency: np.ndarray

    @property
    def edges(self):
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return set(zip(i.tolist(), j.tolist()))

    @property
    def degrees(self):
        return self.adjacency.sum(axis=1)

    def n_components(self) -> int:
        return int(connected_components(csr_matrix(self.adjacency), directed=False)[0])


def sq_dists_to(points, x) -> np.ndarray:
    """Squared distances from each row of ``points`` to the single point ``x``."""
    diff = points - x
    return (diff * diff).sum(axis=-1)


def pairwise_sq_dists(a, b=None) -> np.ndarray:
    """Squared Euclidean distances between rows of ``a`` and rows of ``b``.

    Built from explicit differences one row at a time (no ``|a|^2 + |b|^2 - 2ab``
    shortcut), so each entry is bit-identical to :func:`sq_dists_to` for the
    same pair and the result is exactly symmetric when ``b`` is ``a``.
    """
    a = np.asarray(a, dtype=float)
    b = a if b is None else np.asarray(b, dtype=float)
    out = np.empty((a.shape[0], b.shape[0]))
    for i, x in enumerate(a):
        out[i] = sq_dists_to(b, x)
    return out


def knn_indices(points, k: int) -> np.ndarray:
    """``(n, k)`` array: row i holds i's k nearest other points."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    d = pairwise_sq_dists(points)
    # push self to the end so it is never picked, even with duplicate points
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")
    return order[:, :k]


def _warn_if_disconnected(g: NeighborGraph) -> NeighborGraph:
    if g.n > 1:
        comps = g.n_components()
        if comps > 1:
            log.warning("neighbor graph has %d connected components", comps)
    return g


def knn_graph(points, k: int) -> NeighborGraph:
    """Union-symmetrised k-nearest-neighbor graph."""
    nbrs = knn_indices(points, k)
    n = nbrs.shape[0]
    adj = np.zeros((n, n), dtype=bool)
    adj[np.repeat(np.arange(n), k), nbrs.ravel()] = True
    adj |= adj.T
    np.fill_diagonal(adj, False)
    return _warn_if_disconnected(NeighborGraph(n=n, adjacency=adj))


def ball_graph(points, tau: float) -> NeighborGraph:
    if tau <= 0:
        raise ValueError("tau must be positive")
    d = pairwise_sq_dists(points)
    adj = d <= tau * tau
    np.fill_diagonal(adj, False)
    return _warn_if_disconnected(NeighborGraph(n=adj.shape[0], adjacency=adj))


def weight_matrix(points, g: NeighborGraph, t: float) -> np.ndarray:
    """Heat weights ``exp(-dist^2 / t)`` on edges, 1 on the diagonal, 0 elsewhere."""
    if t <= 0:
        raise ValueError("temperature t must be positive")
    d = pairwise_sq_dists(points)
    w = np.where(g.adjacency, np.exp(-d / t), 0.0)
    np.fill_diagonal(w, 1.0)
    return w
