import numpy as np
import pytest
from hypothesis import given, strategies as st

from comsearch.errors import ParameterError, ParseError, SelfLoopWarning
from comsearch.graph import (Graph, GroundTruth, SbmParams, generate_sbm, largest_connected_component,
                             linear_alpha, load_edge_list, load_ground_truth, membership_vector,
                             save_edge_list, save_ground_truth)

from conftest import cliques, random_graph


def test_graph_symmetric_no_loops():
    g = Graph.from_edges(4, [(0, 1), (1, 0), (2, 2), (2, 3)])
    a = g.to_dense()
    assert (a == a.T).all()
    assert not a.diagonal().any()
    assert g.n_edges == 2


def test_graph_is_read_only():
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        g.adjacency.data[0] = 5.0


@pytest.mark.parametrize("kwargs", [
    dict(n=10, k=2, p=0.1, q=0.2, alpha=(0.5, 0.5)),
    dict(n=10, k=2, p=0.5, q=0.1, alpha=(0.6, 0.6)),
    dict(n=10, k=2, p=0.5, q=0.1, alpha=(0.95, 0.05)),
    dict(n=10, k=1, p=1.5, q=0.1, alpha=(1.0,)),
    dict(n=10, k=2, p=0.5, q=0.1, alpha=(1.0,)),
])
def test_sbm_params_validation(kwargs):
    with pytest.raises(ParameterError):
        SbmParams(**kwargs)


def test_linear_alpha():
    a = linear_alpha(5, 0.1)
    assert np.allclose(a, (0.1, 0.15, 0.2, 0.25, 0.3))
    assert abs(sum(a) - 1) < 1e-12


def test_community_sizes_remainder_to_largest():
    params = SbmParams(10, 3, 0.5, 0.1, (0.25, 0.25, 0.5))
    assert list(params.community_sizes()) == [2, 2, 6]


def test_two_cliques():
    g, t = generate_sbm(SbmParams.equal(10, 2, 1.0, 0.0), seed=0)
    assert g.n_edges == 20
    assert list(t.sizes()) == [5, 5]
    assert list(t.assignment) == [0] * 5 + [1] * 5


def test_erdos_renyi_edge_count():
    n, p = 1000, 0.1
    g, _ = generate_sbm(SbmParams.equal(n, 5, p, p - 1e-12), seed=1)
    pairs = n * (n - 1) / 2
    assert abs(g.n_edges - p * pairs) <= 3 * np.sqrt(pairs * p * (1 - p))


def test_fig7_shape():
    params = SbmParams(1000, 8, 0.14, 0.01, linear_alpha(8, 0.08))
    g, t = generate_sbm(params, seed=0)
    assert g.n == 1000 and t.k == 8
    assert t.sizes()[0] == 80


def test_generate_deterministic():
    params = SbmParams.equal(200, 3, 0.3, 0.05)
    g1, t1 = generate_sbm(params, 7)
    g2, t2 = generate_sbm(params, 7)
    assert g1 == g2 and (t1.assignment == t2.assignment).all()
    assert generate_sbm(params, 8)[0] != g1


def test_shuffle_keeps_sizes():
    params = SbmParams(100, 2, 0.5, 0.1, (0.3, 0.7))
    _, t = generate_sbm(params, 0, shuffle=True)
    assert sorted(t.sizes()) == [30, 70]
    assert list(t.assignment[:30]) != [0] * 30


def test_sbm_densities():
    params = SbmParams.equal(500, 2, 0.3, 0.05)
    within, across = [], []
    for seed in range(20):
        g, t = generate_sbm(params, seed)
        a = g.adjacency
        same = t.assignment[:, None] == t.assignment[None, :]
        d = a.toarray()
        iu = np.triu_indices(500, 1)
        within.append(d[iu][same[iu]].mean())
        across.append(d[iu][~same[iu]].mean())
    n_within = 2 * 250 * 249 / 2
    n_across = 250 * 250
    for obs, p, m in ((within, 0.3, n_within), (across, 0.05, n_across)):
        se = np.sqrt(p * (1 - p) / (m * 20))
        assert abs(np.mean(obs) - p) <= 4 * se


def test_membership_vector():
    t = GroundTruth(np.array([0, 0, 1, 1]))
    params = SbmParams.equal(4, 2, 0.9, 0.1)
    assert np.allclose(membership_vector(params, t, 0).values, [0.9, 0.9, 0.1, 0.1])
    ind = membership_vector(SbmParams.equal(4, 2, 1.0, 0.0), t, 1).values
    assert list(ind) == [0, 0, 1, 1]
    one = membership_vector(SbmParams(4, 1, 0.4, 0.1, (1.0,)), GroundTruth(np.zeros(4, int)), 0)
    assert np.allclose(one.values, 0.4)
    with pytest.raises(IndexError):
        membership_vector(params, t, 2)


def test_ground_truth_requires_all_communities():
    with pytest.raises(ParameterError):
        GroundTruth(np.array([0, 0, 2]), k=3)


def test_load_path_graph(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("0 1\n1 2")
    g = load_edge_list(f)
    assert g.n == 3 and g.n_edges == 2 and g.has_edge(1, 2)


def test_load_drops_self_loops(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("0 1\n1 0\n0 0\n")
    with pytest.warns(SelfLoopWarning, match="1 self-loop"):
        g = load_edge_list(f)
    assert g.n_edges == 1 and g.has_edge(0, 1)


@pytest.mark.parametrize("text,line", [("0 1\n1 x\n", 2), ("0 1 2\n", 1), ("# n=3\n0 1\n1 3\n", 3),
                                       ("0 1\n\n-1 2\n", 3)])
def test_load_errors(tmp_path, text, line):
    f = tmp_path / "g.txt"
    f.write_text(text)
    with pytest.raises(ParseError) as exc:
        load_edge_list(f)
    assert exc.value.line == line


def test_header_keeps_isolated_nodes(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("# n=6\n0 1\n")
    assert load_edge_list(f).n == 6


@given(st.integers(2, 40), st.floats(0.0, 1.0), st.integers(0, 2**31))
def test_round_trip(n, p, seed):
    import tempfile, os
    g = random_graph(n, p, seed)
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "g.txt")
        save_edge_list(g, path)
        assert load_edge_list(path) == g


def test_ground_truth_round_trip(tmp_path):
    t = GroundTruth(np.array([1, 0, 2, 1]))
    save_ground_truth(t, tmp_path / "l.txt")
    assert (load_ground_truth(tmp_path / "l.txt", 4).assignment == t.assignment).all()


def test_lcc_connected_is_identity():
    g = cliques(4)
    h, m = largest_connected_component(g)
    assert h == g and m == {i: i for i in range(4)}


def test_lcc_picks_larger_clique():
    g = Graph.from_edges(8, [(i, j) for i in range(3) for j in range(i + 1, 3)]
                         + [(i, j) for i in range(3, 8) for j in range(i + 1, 8)])
    h, m = largest_connected_component(g)
    assert h.n == 5 and h.n_edges == 10
    assert sorted(m) == [3, 4, 5, 6, 7]


def test_lcc_empty():
    h, m = largest_connected_component(Graph.from_edges(0, []))
    assert h.n == 0 and m == {}


@given(st.integers(1, 30), st.floats(0.0, 0.3), st.integers(0, 2**31))
def test_lcc_properties(n, p, seed):
    from scipy.sparse.csgraph import connected_components
    g = random_graph(n, p, seed)
    h, m = largest_connected_component(g)
    assert connected_components(h.adjacency)[0] <= 1
    assert len(set(m.values())) == len(m) == h.n
    inv = {v: k for k, v in m.items()}
    for u, v in h.edges():
        assert g.has_edge(inv[u], inv[v])
    kept = set(m)
    assert h.n_edges == sum(1 for u, v in g.edges() if u in kept and v in kept)
