"""Side-information weights: synthetic two-level weights and labeled-node
shell counts."""

from __future__ import annotations

import enum
import math
import warnings
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .errors import DegenerateWeights, ParameterError
from .graph import Graph, GroundTruth
from .partition import PartitionScheme

RADIUS_MIN = 1
RADIUS_MAX = 10


class WeightScope(str, enum.Enum):
    WHOLE_GRAPH = "whole"
    SPLIT_CONFORMING = "split"


def validate_weights(w, n: int | None = None) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1:
        raise ParameterError("weights must be a vector")
    if n is not None and w.size != n:
        raise ParameterError(f"expected {n} weights, got {w.size}")
    if not np.all(np.isfinite(w)) or (w < 0).any():
        raise ParameterError("weights must be finite and nonnegative")
    return w


def synthetic_weights(truth: GroundTruth, target: int, w_lo: float = 5.0, w_hi: float = 10.0,
                      rho: float = 0.8, seed: int = 0) -> np.ndarray:
    """Target nodes draw ``w_hi`` with probability ``rho``; all other nodes
    draw ``w_hi`` with probability ``1 - rho``.  Otherwise ``w_lo``."""
    if not 0 <= target < truth.k:
        raise IndexError(f"target {target} out of range [0, {truth.k})")
    if not 0 < rho < 1:
        raise ParameterError("rho must lie in (0, 1)")
    if not w_lo < w_hi:
        raise ParameterError("need w_lo < w_hi")
    if w_lo < 0:
        raise ParameterError("weights must be nonnegative")
    prob = np.where(truth.assignment == target, rho, 1.0 - rho)
    u = np.random.default_rng(seed).random(truth.n)
    return np.where(u < prob, float(w_hi), float(w_lo))


def expected_synthetic_weight(w_lo: float, w_hi: float, rho: float) -> tuple[float, float]:
    """(mean weight inside the target, mean weight outside it)."""
    return rho * w_hi + (1 - rho) * w_lo, (1 - rho) * w_hi + rho * w_lo


def rho_for_gap(gap: float, w_lo: float, w_hi: float) -> float:
    """Probability giving an expected-weight gap of ``gap`` between target and
    non-target nodes."""
    rho = 0.5 + gap / (2.0 * (w_hi - w_lo))
    if not 0.5 <= rho < 1:
        raise ParameterError(f"gap {gap} not reachable with weights ({w_lo}, {w_hi})")
    return rho


def choose_labeled(truth: GroundTruth, target: int, m: int, seed: int) -> np.ndarray:
    members = truth.members(target)
    if not 1 <= m <= members.size:
        raise ParameterError(f"cannot label {m} of {members.size} nodes")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(members, size=m, replace=False))


def _labeled_array(labeled: Iterable[int], n: int) -> np.ndarray:
    arr = np.asarray(list(labeled), dtype=np.int64)
    if arr.size == 0:
        raise ParameterError("labeled set must be nonempty")
    if arr.min() < 0 or arr.max() >= n:
        raise ParameterError("labeled node id out of range")
    if np.unique(arr).size != arr.size:
        raise ParameterError("labeled set has duplicates")
    return np.sort(arr)


def _shell_counts(adj: sp.csr_matrix, sources: np.ndarray, r: int, per_node: np.ndarray,
                  pair_edges: np.ndarray) -> np.ndarray:
    """For each source, sum ``per_node`` over its distance-``r`` shell, then
    remove one count per ``pair_edges`` edge lying wholly inside the shell."""
    n = adj.shape[0]
    out = np.zeros(sources.size)
    chunk = max(1, (1 << 22) // max(n, 1))
    for s0 in range(0, sources.size, chunk):
        idx = sources[s0:s0 + chunk]
        dist = dijkstra(adj, directed=False, unweighted=True, indices=idx, limit=r)
        shell = dist == r
        w = shell @ per_node
        if pair_edges.size:
            w -= np.count_nonzero(shell[:, pair_edges[:, 0]] & shell[:, pair_edges[:, 1]], axis=1)
        out[s0:s0 + chunk] = w
    return out


def labeled_weights(graph: Graph, labeled: Iterable[int], r: int,
                    scope: WeightScope | str = WeightScope.WHOLE_GRAPH,
                    partition: PartitionScheme | None = None) -> np.ndarray:
    """Weight of node i = number of edges joining the labeled set to the set
    of nodes at BFS distance exactly ``r`` from i.

    With ``scope="split"`` the BFS for a node in quarter ``a`` runs inside
    that quarter only, and only labeled nodes in quarter ``a - 1`` (cyclic)
    count.  Those edge sets are never read by the moment estimates of any
    rotation that uses the node's weight.
    """
    scope = WeightScope(scope)
    if r < 1:
        raise ParameterError("radius must be >= 1")
    n = graph.n
    L = _labeled_array(labeled, n)
    adj = graph.adjacency
    in_l = np.zeros(n)
    in_l[L] = 1.0
    w = np.zeros(n)

    if scope is WeightScope.WHOLE_GRAPH:
        per_node = adj @ in_l
        e = graph.edges()
        pair_edges = e[(in_l[e[:, 0]] > 0) & (in_l[e[:, 1]] > 0)]
        w = _shell_counts(adj, np.arange(n), r, per_node, pair_edges)
    else:
        if partition is None or partition.n != n:
            raise ParameterError("split scope needs a partition of the graph's nodes")
        for a, qa in enumerate(partition.quarters):
            qb = partition.quarters[(a - 1) % 4]
            sub = adj[qa][:, qa]
            per_node = adj[qa][:, qb] @ in_l[qb]
            w[qa] = _shell_counts(sub, np.arange(qa.size), r, per_node, np.empty((0, 2), np.int64))

    if not w.any():
        warnings.warn("all labeled-node weights are zero; radius may exceed the graph diameter",
                      DegenerateWeights, stacklevel=2)
    return w


def recommended_radius(n: int, avg_degree: float, L_size: int) -> int:
    """Radius ``2 log(n^eps / L) / log(np)`` with ``np`` estimated by the
    average degree and ``n^eps`` by ``n log n / avg_degree``; rounded and
    clamped to [1, 10]."""
    if avg_degree <= 1:
        raise ParameterError("average degree must exceed 1")
    if L_size < 1:
        raise ParameterError("need at least one labeled node")
    n_eps = n * math.log(n) / avg_degree
    r = 2.0 * math.log(n_eps / L_size) / math.log(avg_degree)
    return int(min(RADIUS_MAX, max(RADIUS_MIN, math.floor(r + 0.5))))
