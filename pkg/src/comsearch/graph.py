"""Graphs, stochastic block model sampling and edge-list I/O.

Nodes are always labelled ``0 .. n-1``. The adjacency matrix is kept as a
read-only CSR matrix of 0/1 floats so that moment computations can multiply
column slices directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ParameterError, ParseError, SelfLoopWarning

ALPHA_SUM_TOL = 1e-12


class Graph:
    """Immutable undirected simple graph on ``n`` nodes."""

    __slots__ = ("_n", "_adj", "_edges")

    def __init__(self, n: int, adjacency: sp.spmatrix | np.ndarray):
        if n < 0:
            raise ParameterError("node count must be nonnegative")
        adj = sp.csr_matrix(adjacency, dtype=np.float64)
        if adj.shape != (n, n):
            raise ParameterError(f"adjacency shape {adj.shape} does not match n={n}")
        adj.setdiag(0)
        adj.eliminate_zeros()
        adj.data[:] = 1.0
        if (adj != adj.T).nnz:
            raise ParameterError("adjacency must be symmetric")
        adj.sort_indices()
        for arr in (adj.data, adj.indices, adj.indptr):
            arr.flags.writeable = False
        self._n = int(n)
        self._adj = adj
        self._edges = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        """Build a graph from (u, v) pairs; duplicates, both orientations and
        self-loops are tolerated (self-loops are dropped)."""
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if e.size == 0:
            return cls(n, sp.csr_matrix((n, n)))
        e = e.reshape(-1, 2)
        if e.min() < 0 or e.max() >= n:
            raise ParameterError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n)).tocsr()
        return cls(n, adj)

    @property
    def n(self) -> int:
        return self._n

    @property
    def adjacency(self) -> sp.csr_matrix:
        return self._adj

    @property
    def n_edges(self) -> int:
        return self._adj.nnz // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self._adj.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        a = self._adj
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        j = np.searchsorted(nb, v)
        return bool(j < nb.size and nb[j] == v)

    def edges(self) -> np.ndarray:
        """Edges as an (m, 2) array with ``u < v``, sorted lexicographically."""
        if self._edges is None:
            upper = sp.triu(self._adj, k=1).tocoo()
            e = np.column_stack([upper.row, upper.col]).astype(np.int64)
            order = np.lexsort((e[:, 1], e[:, 0]))
            self._edges = e[order]
            self._edges.flags.writeable = False
        return self._edges

    def block(self, rows: np.ndarray, cols: np.ndarray) -> sp.csr_matrix:
        """Sparse submatrix X[rows, cols]."""
        return self._adj[rows][:, cols]

    def dense_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return self.block(rows, cols).toarray()

    def to_dense(self) -> np.ndarray:
        return self._adj.toarray()

    def subgraph(self, nodes: Sequence[int]) -> "Graph":
        nodes = np.asarray(nodes, dtype=np.int64)
        return Graph(nodes.size, self._adj[nodes][:, nodes])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and (self._adj != other._adj).nnz == 0

    def __hash__(self):
        return hash((self._n, self.edges().tobytes()))

    def __repr__(self):
        return f"Graph(n={self._n}, edges={self.n_edges})"


@dataclass(frozen=True)
class SbmParams:
    n: int
    k: int
    p: float
    q: float
    alpha: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if self.n < 1:
            raise ParameterError("n must be positive")
        if not 1 <= self.k <= self.n:
            raise ParameterError("k must satisfy 1 <= k <= n")
        if len(self.alpha) != self.k:
            raise ParameterError(f"alpha has {len(self.alpha)} entries, expected k={self.k}")
        if not 0 < self.p <= 1:
            raise ParameterError("p must lie in (0, 1]")
        if not 0 <= self.q < 1:
            raise ParameterError("q must lie in [0, 1)")
        if self.q > self.p:
            raise ParameterError("q must not exceed p")
        if any(a <= 0 for a in self.alpha):
            raise ParameterError("community fractions must be positive")
        if abs(math.fsum(self.alpha) - 1.0) > ALPHA_SUM_TOL:
            raise ParameterError("community fractions must sum to 1")
        if any(math.floor(a * self.n) < 1 for a in self.alpha):
            raise ParameterError("every community needs at least one node")

    @classmethod
    def equal(cls, n: int, k: int, p: float, q: float) -> "SbmParams":
        return cls(n, k, p, q, tuple([1.0 / k] * k))

    def community_sizes(self) -> np.ndarray:
        """floor(alpha_i n) with the remainder given to the largest community."""
        sizes = np.array([math.floor(a * self.n) for a in self.alpha], dtype=np.int64)
        sizes[int(np.argmax(self.alpha))] += self.n - sizes.sum()
        return sizes


def linear_alpha(k: int, alpha_min: float) -> tuple[float, ...]:
    """Linearly spaced community fractions from ``alpha_min`` upward, summing to one."""
    if k == 1:
        return (1.0,)
    top = 2.0 / k - alpha_min
    if alpha_min <= 0 or top < alpha_min:
        raise ParameterError("alpha_min must lie in (0, 1/k]")
    alpha = np.linspace(alpha_min, top, k)
    alpha[-1] = 1.0 - alpha[:-1].sum()
    return tuple(float(a) for a in alpha)


@dataclass(frozen=True)
class GroundTruth:
    assignment: np.ndarray
    k: int = field(default=-1)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)
        k = self.k if self.k >= 0 else (int(a.max()) + 1 if a.size else 0)
        object.__setattr__(self, "k", k)
        if a.size and (a.min() < 0 or a.max() >= k):
            raise ParameterError("community index out of range")
        if np.unique(a).size != k:
            raise ParameterError("every community must have at least one node")

    @property
    def n(self) -> int:
        return self.assignment.size

    def members(self, i: int) -> np.ndarray:
        if not 0 <= i < self.k:
            raise IndexError(f"community {i} out of range [0, {self.k})")
        return np.flatnonzero(self.assignment == i)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)


@dataclass(frozen=True)
class MembershipVector:
    values: np.ndarray
    community: int


def generate_sbm(params: SbmParams, seed: int, shuffle: bool = False) -> tuple[Graph, GroundTruth]:
    """Sample an SBM graph.

    Communities occupy contiguous index ranges in order; with ``shuffle`` the
    node labels are then permuted by a seeded random permutation.  Each
    unordered pair is an independent Bernoulli draw.
    """
    if not isinstance(params, SbmParams):
        raise ParameterError("params must be SbmParams")
    rng = np.random.default_rng(seed)
    n = params.n
    assignment = np.repeat(np.arange(params.k), params.community_sizes())
    chunk = max(1, (1 << 22) // max(n, 1))
    rows_out, cols_out = [], []
    for r0 in range(0, n, chunk):
        r1 = min(n, r0 + chunk)
        u = rng.random((r1 - r0, n))
        same = assignment[r0:r1, None] == assignment[None, :]
        hit = u < np.where(same, params.p, params.q)
        hit &= np.arange(n)[None, :] > np.arange(r0, r1)[:, None]
        r, c = np.nonzero(hit)
        rows_out.append(r + r0)
        cols_out.append(c)
    rows = np.concatenate(rows_out)
    cols = np.concatenate(cols_out)
    if shuffle:
        perm = rng.permutation(n)
        rows, cols = perm[rows], perm[cols]
        relabelled = np.empty_like(assignment)
        relabelled[perm] = assignment
        assignment = relabelled
    graph = Graph.from_edges(n, np.column_stack([rows, cols]))
    return graph, GroundTruth(assignment, params.k)


def membership_vector(params: SbmParams, truth: GroundTruth, i: int) -> MembershipVector:
    if not 0 <= i < params.k:
        raise IndexError(f"community {i} out of range [0, {params.k})")
    values = np.where(truth.assignment == i, params.p, params.q).astype(np.float64)
    return MembershipVector(values, i)


def largest_connected_component(graph: Graph) -> tuple[Graph, dict[int, int]]:
    """Largest component (ties: the one holding the smallest node id) and the
    old -> new node id map.  New ids preserve the relative order of old ids."""
    if graph.n == 0:
        return graph, {}
    _, labels = connected_components(graph.adjacency, directed=False)
    counts = np.bincount(labels)
    keep = np.flatnonzero(labels == int(np.argmax(counts)))
    return graph.subgraph(keep), {int(old): new for new, old in enumerate(keep)}


def _parse_header(line: str, lineno: int) -> int | None:
    body = line[1:].strip().replace(" ", "")
    if body.startswith("n="):
        try:
            n = int(body[2:])
        except ValueError:
            raise ParseError(f"bad header {line.strip()!r}", lineno) from None
        if n < 0:
            raise ParseError("negative node count in header", lineno)
        return n
    return None


def load_edge_list(path: str | Path) -> Graph:
    """Read whitespace separated ``u v`` pairs (0-based).

    An optional first line ``# n=<n>`` fixes the node count; otherwise it is
    ``max id + 1``.  Other ``#`` lines and blank lines are ignored.
    """
    n_declared = None
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                if lineno == 1:
                    n_declared = _parse_header(s, lineno)
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ParseError(f"expected 'u v', got {s!r}", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node id in {s!r}", lineno) from None
            if u < 0 or v < 0:
                raise ParseError("negative node id", lineno)
            if n_declared is not None and max(u, v) >= n_declared:
                raise ParseError(f"node id {max(u, v)} >= declared n={n_declared}", lineno)
            pairs.append((u, v))
    e = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    n = n_declared if n_declared is not None else (int(e.max()) + 1 if e.size else 0)
    loops = int(np.count_nonzero(e[:, 0] == e[:, 1]))
    if loops:
        warnings.warn(f"dropped {loops} self-loop(s) from {path}", SelfLoopWarning, stacklevel=2)
    return Graph.from_edges(n, e)


def save_edge_list(graph: Graph, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={graph.n}\n")
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")


def load_labels(path: str | Path) -> dict[str, str]:
    """Read ``node_id community_id`` lines as raw strings."""
    labels = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ParseError(f"expected 'node community', got {s!r}", lineno)
            labels[parts[0]] = parts[1]
    return labels


def load_ground_truth(path: str | Path, n: int) -> GroundTruth:
    raw = load_labels(path)
    assignment = np.full(n, -1, dtype=np.int64)
    for node, comm in raw.items():
        try:
            i, c = int(node), int(comm)
        except ValueError:
            raise ParseError(f"non-integer label entry {node} {comm}") from None
        if not 0 <= i < n:
            raise ParseError(f"node id {i} out of range for n={n}")
        assignment[i] = c
    if (assignment < 0).any():
        raise ParseError("labels missing for some nodes")
    return GroundTruth(assignment)


def save_ground_truth(truth: GroundTruth, path: str | Path) -> None:
    with open(path, "w") as fh:
        for i, c in enumerate(truth.assignment):
            fh.write(f"{i} {c}\n")
