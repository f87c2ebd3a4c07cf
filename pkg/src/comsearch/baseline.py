"""Spectral clustering baseline: bottom-k eigenvectors of the normalized
Laplacian, single-linkage (SLINK) on the embedding rows, then pick the
cluster with the highest mean weight as the target."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import ParameterError
from .graph import Graph


@dataclass(frozen=True)
class Clustering:
    assignment: np.ndarray
    k: int

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)


@dataclass(frozen=True)
class Dendrogram:
    """Single-linkage merges in nondecreasing height order.

    ``merges[t] = (a, b)`` joins clusters ``a`` and ``b`` (ids < n are
    singletons, id ``n + t`` is the cluster formed by merge ``t``).
    ``pointer``/``height`` hold Sibson's pointer representation.
    """

    merges: np.ndarray
    heights: np.ndarray
    pointer: np.ndarray
    height: np.ndarray

    @property
    def n(self) -> int:
        return self.pointer.size


def normalized_laplacian(graph: Graph) -> np.ndarray:
    """Dense ``I - D^-1/2 A D^-1/2``; isolated nodes get an identity row."""
    deg = graph.degrees().astype(np.float64)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    scaled = sp.diags(inv_sqrt) @ graph.adjacency @ sp.diags(inv_sqrt)
    lap = np.eye(graph.n) - scaled.toarray()
    return 0.5 * (lap + lap.T)


def spectral_embed(graph: Graph, k: int) -> np.ndarray:
    if not 1 <= k <= graph.n:
        raise ParameterError(f"k must lie in [1, {graph.n}]")
    _, vecs = scipy.linalg.eigh(normalized_laplacian(graph), subset_by_index=[0, k - 1])
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.where(vecs[idx, np.arange(k)] < 0, -1.0, 1.0)
    return vecs * signs


@numba.njit(cache=True)
def _slink_pointer(points):
    n, dim = points.shape
    pi = np.empty(n, dtype=np.int64)
    lam = np.empty(n)
    m = np.empty(n)
    for i in range(n):
        pi[i] = i
        lam[i] = np.inf
        for j in range(i):
            acc = 0.0
            for d in range(dim):
                diff = points[j, d] - points[i, d]
                acc += diff * diff
            m[j] = np.sqrt(acc)
        for j in range(i):
            if lam[j] >= m[j]:
                if lam[j] < m[pi[j]]:
                    m[pi[j]] = lam[j]
                lam[j] = m[j]
                pi[j] = i
            elif m[j] < m[pi[j]]:
                m[pi[j]] = m[j]
        for j in range(i):
            if lam[j] >= lam[pi[j]]:
                pi[j] = i
    return pi, lam


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def slink(points) -> Dendrogram:
    """Exact single-linkage hierarchy of the rows of ``points`` (Euclidean),
    O(n^2) time and O(n) memory.

    Merges at equal height are ordered so that the one involving the larger
    node index comes first; cutting therefore splits off smaller indices first.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n == 0:
        raise ParameterError("need at least one point")
    pi, lam = _slink_pointer(pts)
    order = np.lexsort((-np.arange(n - 1), lam[:n - 1]))
    parent = list(range(n))
    cluster_id = list(range(n))
    merges = np.empty((n - 1, 2), dtype=np.int64)
    for t, j in enumerate(order):
        a, b = _find(parent, int(j)), _find(parent, int(pi[j]))
        merges[t] = (min(cluster_id[a], cluster_id[b]), max(cluster_id[a], cluster_id[b]))
        parent[a] = b
        cluster_id[b] = n + t
    return Dendrogram(merges, lam[order].copy(), pi, lam)


def cut_to_k(dendrogram: Dendrogram, k: int) -> Clustering:
    """Undo the k-1 last merges.  Cluster ids follow the smallest member index."""
    n = dendrogram.n
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in [1, {n}]")
    parent = list(range(2 * n - 1))
    for t in range(n - k):
        a, b = dendrogram.merges[t]
        parent[a] = n + t
        parent[b] = n + t
    roots = np.array([_find(parent, i) for i in range(n)])
    _, first = np.unique(roots, return_index=True)
    relabel = {roots[i]: c for c, i in enumerate(np.sort(first))}
    return Clustering(np.array([relabel[r] for r in roots], dtype=np.int64), k)


def spectral_cluster(graph: Graph, k: int) -> Clustering:
    return cut_to_k(slink(spectral_embed(graph, k)), k)


def select_target(clustering: Clustering, weights) -> int:
    """Cluster with the largest mean weight (smallest id on ties)."""
    w = np.asarray(weights, dtype=np.float64)
    sums = np.bincount(clustering.assignment, weights=w, minlength=clustering.k)
    counts = np.bincount(clustering.assignment, minlength=clustering.k)
    means = np.where(counts > 0, sums / np.maximum(counts, 1), -np.inf)
    return int(np.argmax(means))
