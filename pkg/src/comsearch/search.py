"""Community search by whitening second-order moments.

One pass of the estimator takes the four quarters in role order
(P1, P2, P3, P4), builds

    A1 = X[P1, P3] / sqrt|P3|        A2 = X[P2, P3] / sqrt|P3|
    m1 = mean_{j in P1} X[P1, j]     B  = mean_{j in P4} w_j X[P1, j] X[P2, j]^T

whitens B with the rank-k SVDs of A1 and A2 and reads the target membership
vector off the leading singular vector.  Four cyclic rotations give every
quarter the P1 role once.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (DegenerateProjection, DegenerateThreshold, DimensionError, EmptyEstimate,
                     ParameterError, RefinementSkipped, SingularWhitening)
from .graph import Graph
from .partition import PartitionScheme, partition_nodes
from .sideinfo import validate_weights
from .spectral import TruncatedSvd, leading_singular_triplet, rank_k_svd

SINGULAR_TOL = 1e-10
# Relative gap (s1 - s2) / s1 of R below which a rotation is flagged unreliable.
DEGENERATE_GAP = 0.05
N_ROTATIONS = 4


@dataclass(frozen=True)
class EmpiricalMoments:
    a1: np.ndarray
    a2: np.ndarray
    m1: np.ndarray
    b: np.ndarray
    roles: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class Whitening:
    svd1: TruncatedSvd
    svd2: TruncatedSvd
    w1: np.ndarray
    w2: np.ndarray
    residual: float


@dataclass(frozen=True)
class SubroutineResult:
    mu_hat: np.ndarray
    alpha_hat: float
    sigma1: float
    sigma2: float
    a: float
    whitening_residual: float

    @property
    def gap(self) -> float:
        return self.sigma1 - self.sigma2


@dataclass(frozen=True)
class RotationDiagnostics:
    rotation: int
    sigma1: float
    sigma2: float
    a: float
    alpha_hat: float
    tau: float
    n_selected: int
    whitening_residual: float

    @property
    def gap(self) -> float:
        return self.sigma1 - self.sigma2

    @property
    def relative_gap(self) -> float:
        return self.gap / self.sigma1 if self.sigma1 > 0 else 0.0


@dataclass(frozen=True)
class CommunityEstimate:
    nodes: np.ndarray
    mu_hat: np.ndarray
    alpha_hat: float
    rotations: tuple[RotationDiagnostics, ...]
    partition: PartitionScheme
    k: int
    weights_informative: bool = True
    refined: bool = False

    @property
    def reliable(self) -> bool:
        """False for constant weights, or when some rotation had (nearly) tied
        top singular values of R so the weights did not single out one community."""
        return self.weights_informative and all(
            r.relative_gap >= DEGENERATE_GAP for r in self.rotations)

    @property
    def sigma_gap(self) -> float:
        return float(np.mean([r.gap for r in self.rotations]))


def _checked_weights(weights, n: int) -> np.ndarray:
    try:
        return validate_weights(weights, n)
    except ParameterError as exc:
        raise DimensionError(str(exc)) from None


def _weighted_cooccurrence(x14: sp.csr_matrix, x24: sp.csr_matrix, w4: np.ndarray) -> np.ndarray:
    # Sum of w_j X[P1, j] X[P2, j]^T over j in P4, via the sparse column supports.
    return (x14 @ sp.diags(w4) @ x24.T).toarray() / w4.size


def build_moments(graph: Graph, partition: PartitionScheme, weights, rotation: int = 0) -> EmpiricalMoments:
    if partition.n != graph.n:
        raise DimensionError(f"partition covers {partition.n} nodes, graph has {graph.n}")
    w = _checked_weights(weights, graph.n)
    p1, p2, p3, p4 = partition.roles(rotation)
    scale = 1.0 / math.sqrt(p3.size)
    a1 = graph.dense_block(p1, p3) * scale
    a2 = graph.dense_block(p2, p3) * scale
    m1 = np.asarray(graph.block(p1, p1).sum(axis=1)).ravel() / p1.size
    b = _weighted_cooccurrence(graph.block(p1, p4), graph.block(p2, p4), w[p4])
    return EmpiricalMoments(a1, a2, m1, b, (p1, p2, p3, p4))


def whiten(a1, a2, k: int) -> Whitening:
    """Rank-k whiteners W = U D^-1 for A1 and A2."""
    svds = []
    for name, a in (("A1", a1), ("A2", a2)):
        if k > min(a.shape):
            raise DimensionError(f"k={k} exceeds the dimensions of {name} {a.shape}")
        s = rank_k_svd(a, k)
        if not s.D[0] > 0 or s.D[-1] <= SINGULAR_TOL * s.D[0]:
            raise SingularWhitening(f"sigma_k({name}) = {s.D[-1]:.3g} is numerically zero "
                                    f"(sigma_1 = {s.D[0]:.3g})")
        svds.append(s)
    s1, s2 = svds
    w1 = s1.U / s1.D
    w2 = s2.U / s2.D
    g = w1.T @ a1
    residual = float(np.abs(g @ g.T - np.eye(k)).max())
    return Whitening(s1, s2, w1, w2, residual)


def _project(wh: Whitening, b: np.ndarray, m1: np.ndarray) -> SubroutineResult:
    r = wh.w1.T @ b @ wh.w2
    u, sigma1, sigma2 = leading_singular_triplet(r)
    a = float(u @ (wh.w1.T @ m1))
    if a == 0.0 or not math.isfinite(a):
        raise DegenerateProjection("mean vector is orthogonal to the leading whitened direction")
    if a < 0:
        u, a = -u, -a
    z = wh.svd1.U @ (wh.svd1.D * u)
    return SubroutineResult(z / a, a * a, sigma1, sigma2, a, wh.residual)


def search_subroutine(moments: EmpiricalMoments, k: int) -> SubroutineResult:
    """Estimate the membership vector over P1 of the community carrying the
    largest expected weight, and its size fraction."""
    return _project(whiten(moments.a1, moments.a2, k), moments.b, moments.m1)


def threshold_membership(mu_hat, tau: float) -> np.ndarray:
    """Positions of ``mu_hat`` strictly above ``tau``."""
    return np.flatnonzero(np.asarray(mu_hat) > tau)


def auto_threshold(mu_hat) -> float:
    """Midpoint between the two centroids of the optimal 1-D 2-means split.

    The split is exact (prefix sums over the sorted values).  Among equally
    good splits the one giving the upper cluster more points wins.
    """
    x = np.sort(np.asarray(mu_hat, dtype=np.float64))
    if x.size < 2:
        raise DegenerateThreshold("need at least two values")
    if x[-1] - x[0] <= 1e-12 * max(1.0, abs(x[-1]), abs(x[0])):
        raise DegenerateThreshold("all values are equal")
    m = x.size
    c = np.cumsum(x)
    s = np.arange(1, m)
    left, right = c[:-1], c[-1] - c[:-1]
    cost = -(left ** 2 / s + right ** 2 / (m - s))
    cost[x[1:] <= x[:-1]] = np.inf
    best = int(np.argmin(cost)) + 1
    return 0.5 * (c[best - 1] / best + (c[-1] - c[best - 1]) / (m - best))


@dataclass(frozen=True)
class _RotationBasis:
    rotation: int
    roles: tuple[np.ndarray, ...]
    whitening: Whitening
    m1: np.ndarray
    x14: sp.csr_matrix
    x24: sp.csr_matrix


def _rotation_bases(graph: Graph, partition: PartitionScheme, k: int) -> list[_RotationBasis]:
    bases = []
    for s in range(N_ROTATIONS):
        p1, p2, p3, p4 = partition.roles(s)
        scale = 1.0 / math.sqrt(p3.size)
        a1 = graph.dense_block(p1, p3) * scale
        a2 = graph.dense_block(p2, p3) * scale
        m1 = np.asarray(graph.block(p1, p1).sum(axis=1)).ravel() / p1.size
        bases.append(_RotationBasis(s, (p1, p2, p3, p4), whiten(a1, a2, k), m1,
                                    graph.block(p1, p4), graph.block(p2, p4)))
    return bases


def _search_from_bases(bases: Sequence[_RotationBasis], partition: PartitionScheme, k: int,
                       weights: np.ndarray, tau: float | None, tau_on_z: bool) -> CommunityEstimate:
    n = partition.n
    mu_full = np.zeros(n)
    chosen, diags, alphas = [], [], []
    for basis in bases:
        p1, _, _, p4 = basis.roles
        b = _weighted_cooccurrence(basis.x14, basis.x24, weights[p4])
        res = _project(basis.whitening, b, basis.m1)
        if tau is None:
            t = auto_threshold(res.mu_hat)
        else:
            t = tau / res.a if tau_on_z else tau
        sel = p1[threshold_membership(res.mu_hat, t)]
        mu_full[p1] = res.mu_hat
        chosen.append(sel)
        alphas.append(res.alpha_hat)
        diags.append(RotationDiagnostics(basis.rotation, res.sigma1, res.sigma2, res.a,
                                         res.alpha_hat, float(t), int(sel.size),
                                         res.whitening_residual))
    nodes = np.sort(np.concatenate(chosen))
    if nodes.size == 0:
        raise EmptyEstimate("no node passed the threshold in any rotation")
    return CommunityEstimate(nodes, mu_full, float(np.mean(alphas)), tuple(diags), partition, k,
                             weights_informative=bool(np.ptp(weights) > 0))


def _prepare(graph: Graph, k: int, seed: int, partition: PartitionScheme | None) -> PartitionScheme:
    if k < 1:
        raise ParameterError("k must be positive")
    if graph.n < 4 * k:
        raise ParameterError(f"need n >= 4k (n={graph.n}, k={k})")
    if partition is None:
        partition = partition_nodes(graph.n, seed)
    elif partition.n != graph.n:
        raise DimensionError("partition does not match the graph")
    return partition


def community_search(graph: Graph, k: int, weights, tau: float | None = None, seed: int = 0,
                     partition: PartitionScheme | None = None, tau_on_z: bool = False) -> CommunityEstimate:
    """Recover the community whose nodes carry the largest expected weight.

    ``tau`` thresholds the estimated membership vector (use ``(p + q) / 2``
    when p and q are known); ``None`` picks a per-rotation 2-means threshold.
    With ``tau_on_z`` the threshold applies to ``z = a * mu_hat`` instead,
    i.e. ``tau`` is then ``sqrt(alpha) (p + q) / 2``-scaled.
    """
    partition = _prepare(graph, k, seed, partition)
    w = _checked_weights(weights, graph.n)
    bases = _rotation_bases(graph, partition, k)
    return _search_from_bases(bases, partition, k, w, tau, tau_on_z)


def parallel_search(graph: Graph, k: int, weight_vectors: Sequence, taus: Sequence | None = None,
                    seed: int = 0, max_workers: int | None = None,
                    partition: PartitionScheme | None = None) -> list:
    """Search several targets at once, sharing the partition, A1/A2 SVDs and m1.

    Returns one entry per weight vector: a CommunityEstimate, or the exception
    raised for that target.
    """
    partition = _prepare(graph, k, seed, partition)
    if taus is None:
        taus = [None] * len(weight_vectors)
    if len(taus) != len(weight_vectors):
        raise ParameterError("need one tau per weight vector")
    bases = _rotation_bases(graph, partition, k)

    def run(i):
        try:
            w = _checked_weights(weight_vectors[i], graph.n)
            return _search_from_bases(bases, partition, k, w, taus[i], False)
        except Exception as exc:  # reported per target
            return exc

    if max_workers == 1 or len(weight_vectors) <= 1:
        return [run(i) for i in range(len(weight_vectors))]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run, range(len(weight_vectors))))


def estimate_pq(graph: Graph, nodes) -> tuple[float, float]:
    """Edge density inside ``nodes`` and between ``nodes`` and the rest."""
    nodes = np.asarray(nodes, dtype=np.int64)
    n, s = graph.n, nodes.size
    inside = np.zeros(n, dtype=bool)
    inside[nodes] = True
    deg_in = np.asarray(graph.adjacency[nodes] @ inside.astype(np.float64)).ravel()
    internal = deg_in.sum() / 2.0
    cut = graph.degrees()[nodes].sum() - 2.0 * internal
    p_hat = internal / (s * (s - 1) / 2.0) if s > 1 else 0.0
    q_hat = cut / (s * (n - s)) if 0 < s < n else 0.0
    return float(p_hat), float(q_hat)


def exact_recovery_refine(graph: Graph, estimate: CommunityEstimate, p: float | None = None,
                          q: float | None = None) -> CommunityEstimate:
    """Degree-threshold clean-up.

    The estimated nodes in quarter ``s`` re-classify quarter ``s + 1``: a node
    joins when its edge count into that set reaches ``|set| (p + q) / 2``.
    p and q default to the densities of the current estimate.
    """
    part = estimate.partition
    if part.n != graph.n:
        raise DimensionError("estimate does not belong to this graph")
    if p is None or q is None:
        p_hat, q_hat = estimate_pq(graph, estimate.nodes)
        p = p_hat if p is None else p
        q = q_hat if q is None else q
    member = np.zeros(graph.n, dtype=bool)
    member[estimate.nodes] = True
    refreshed = []
    for s in range(N_ROTATIONS):
        src = part.quarters[s]
        dst = part.quarters[(s + 1) % N_ROTATIONS]
        src_sel = src[member[src]]
        if src_sel.size == 0:
            warnings.warn(f"quarter {s} has no estimated nodes; quarter {(s + 1) % 4} kept as is",
                          RefinementSkipped, stacklevel=2)
            refreshed.append(dst[member[dst]])
            continue
        deg = np.asarray(graph.block(dst, src_sel).sum(axis=1)).ravel()
        refreshed.append(dst[deg >= src_sel.size * (p + q) / 2.0])
    nodes = np.sort(np.concatenate(refreshed))
    return replace(estimate, nodes=nodes, refined=True)
