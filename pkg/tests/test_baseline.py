import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.cluster.vq import kmeans2
from scipy.optimize import linear_sum_assignment

from comsearch.baseline import (Clustering, cut_to_k, normalized_laplacian, select_target, slink,
                                spectral_cluster, spectral_embed)
from comsearch.errors import ParameterError
from comsearch.graph import Graph, SbmParams, generate_sbm, linear_alpha

from conftest import cliques, random_graph


def naive_single_linkage(points):
    """Merge the two closest clusters until one remains; O(n^3)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    clusters = {i: frozenset([i]) for i in range(n)}
    merges = []
    while len(clusters) > 1:
        best = None
        keys = sorted(clusters)
        for ai, a in enumerate(keys):
            for b in keys[ai + 1:]:
                h = min(d[i, j] for i in clusters[a] for j in clusters[b])
                if best is None or h < best[0]:
                    best = (h, a, b)
        h, a, b = best
        merges.append((h, clusters[a] | clusters[b]))
        clusters[a] = clusters[a] | clusters.pop(b)
    return merges


def merged_sets(dendro):
    n = dendro.n
    members = {i: frozenset([i]) for i in range(n)}
    out = []
    for t, (a, b) in enumerate(dendro.merges):
        members[n + t] = members[a] | members[b]
        out.append((dendro.heights[t], members[n + t]))
    return out


def misclassified(pred, truth, k):
    m = np.zeros((k, k))
    np.add.at(m, (pred, truth), 1)
    r, c = linear_sum_assignment(-m)
    return truth.size - m[r, c].sum()


def test_laplacian_k2():
    ev = np.linalg.eigvalsh(normalized_laplacian(Graph.from_edges(2, [(0, 1)])))
    assert np.allclose(ev, [0, 2])


def test_laplacian_k4():
    ev = np.linalg.eigvalsh(normalized_laplacian(cliques(4)))
    assert np.allclose(ev, [0, 4 / 3, 4 / 3, 4 / 3])


def test_laplacian_two_triangles():
    ev = np.linalg.eigvalsh(normalized_laplacian(cliques(3, 3)))
    assert np.sum(np.abs(ev) < 1e-12) == 2


def test_laplacian_isolated_node():
    lap = normalized_laplacian(Graph.from_edges(3, [(0, 1)]))
    assert lap[2, 2] == 1 and not lap[2, :2].any()


@given(st.integers(1, 30), st.floats(0, 1), st.integers(0, 2**31))
def test_laplacian_spectrum_range(n, p, seed):
    lap = normalized_laplacian(random_graph(n, p, seed))
    assert np.allclose(lap, lap.T)
    ev = np.linalg.eigvalsh(lap)
    assert ev.min() >= -1e-10 and ev.max() <= 2 + 1e-10


def test_embed_two_cliques():
    emb = spectral_embed(cliques(5, 7), 2)
    assert len({tuple(np.round(r, 10)) for r in emb}) == 2


def test_embed_k1_sqrt_degree():
    g = random_graph(30, 0.4, 1)
    emb = spectral_embed(g, 1)[:, 0]
    ref = np.sqrt(g.degrees())
    assert np.allclose(emb, ref / np.linalg.norm(ref))


def test_embed_orthonormal():
    g, _ = generate_sbm(SbmParams.equal(120, 3, 0.4, 0.05), 0)
    emb = spectral_embed(g, 3)
    assert np.allclose(emb.T @ emb, np.eye(3), atol=1e-8)
    lap = normalized_laplacian(g)
    vals = np.diag(emb.T @ lap @ emb)
    assert (np.diff(vals) >= -1e-10).all()


def test_embed_errors():
    with pytest.raises(ParameterError):
        spectral_embed(cliques(3), 4)


def test_embedding_two_means():
    errs = []
    for seed in range(20):
        g, t = generate_sbm(SbmParams.equal(200, 2, 0.5, 0.05), seed)
        _, labels = kmeans2(spectral_embed(g, 2), 2, minit="++", seed=seed)
        errs.append(misclassified(labels, t.assignment, 2))
    assert max(errs) <= 4


def test_slink_small():
    c = cut_to_k(slink(np.array([0.0, 1.0, 3.0])), 2)
    assert list(c.assignment) == [0, 0, 1]


def test_slink_identical_points():
    d = slink(np.zeros((5, 2)))
    assert d.heights[-1] == 0
    c = cut_to_k(d, 2)
    assert list(c.assignment) == [0, 1, 1, 1, 1]


def test_cut_errors():
    d = slink(np.random.default_rng(0).random((4, 2)))
    with pytest.raises(ParameterError):
        cut_to_k(d, 5)
    with pytest.raises(ParameterError):
        cut_to_k(d, 0)
    with pytest.raises(ParameterError):
        slink(np.empty((0, 2)))


def test_slink_100_points_oracle():
    pts = np.random.default_rng(42).random((100, 3))
    _compare(pts)


@given(st.integers(1, 40), st.integers(1, 4), st.integers(0, 2**31))
def test_slink_matches_naive(n, dim, seed):
    _compare(np.random.default_rng(seed).normal(size=(n, dim)))


def _compare(pts):
    ours = merged_sets(slink(pts))
    ref = naive_single_linkage(pts)
    assert len(ours) == len(ref) == len(pts) - 1
    for (h1, s1), (h2, s2) in zip(ours, ref):
        assert abs(h1 - h2) <= 1e-12 and s1 == s2
    heights = [h for h, _ in ours]
    assert (np.diff(heights) >= 0).all()


@given(st.integers(2, 30), st.integers(0, 2**31))
def test_cut_has_every_cluster(n, seed):
    rng = np.random.default_rng(seed)
    d = slink(rng.random((n, 2)))
    k = int(rng.integers(1, n + 1))
    c = cut_to_k(d, k)
    assert sorted(set(c.assignment)) == list(range(k))
    _, first = np.unique(c.assignment, return_index=True)
    assert (np.diff(first) > 0).all()


def test_cluster_two_cliques():
    c = spectral_cluster(cliques(6, 4), 2)
    assert list(c.assignment) == [0] * 6 + [1] * 4


def test_cluster_k_equals_n():
    c = spectral_cluster(cliques(3, 2), 5)
    assert sorted(c.assignment) == list(range(5))


def test_cluster_sbm_k5():
    wrong = 0
    for seed in range(10):
        g, t = generate_sbm(SbmParams.equal(1000, 5, 0.2, 0.02), seed)
        wrong += misclassified(spectral_cluster(g, 5).assignment, t.assignment, 5)
    assert wrong / 10_000 <= 0.05


def test_select_target_examples():
    c = Clustering(np.array([0, 0, 1, 1]), 2)
    assert select_target(c, [9, 9, 5.6, 5.6]) == 0
    assert select_target(c, [5.6, 5.6, 9, 9]) == 1
    assert select_target(c, [1, 3, 2, 2]) == 0
    assert select_target(Clustering(np.zeros(3, int), 1), [1, 2, 3]) == 0


@given(st.integers(0, 2**31), st.integers(-6, 6), st.integers(-50, 50))
def test_select_target_affine_invariance(seed, log_c, b):
    # power-of-two scale and integer shift keep the tie structure exact
    c = 2.0 ** log_c
    rng = np.random.default_rng(seed)
    assignment = rng.integers(0, 4, size=40)
    assignment[:4] = np.arange(4)
    cl = Clustering(assignment, 4)
    w = rng.integers(0, 3, size=40).astype(float)
    assert select_target(cl, c * w + b) == select_target(cl, w)
