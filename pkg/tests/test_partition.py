import numpy as np
import pytest
from hypothesis import given, strategies as st

from comsearch.errors import ParameterError
from comsearch.partition import partition_nodes


def test_n8():
    assert list(partition_nodes(8, 0).sizes) == [2, 2, 2, 2]


def test_n10():
    assert sorted(partition_nodes(10, 0).sizes) == [2, 2, 3, 3]


def test_same_seed():
    a, b = partition_nodes(50, 3), partition_nodes(50, 3)
    assert all((x == y).all() for x, y in zip(a.quarters, b.quarters))


def test_small_n():
    with pytest.raises(ParameterError):
        partition_nodes(3, 0)


@given(st.integers(4, 500), st.integers(0, 2**31))
def test_invariants(n, seed):
    part = partition_nodes(n, seed)
    allq = np.concatenate(part.quarters)
    assert sorted(allq) == list(range(n))
    assert set(part.sizes) <= {n // 4, -(-n // 4)}
    for q in part.quarters:
        assert (np.diff(q) > 0).all()


def test_roles_cycle():
    part = partition_nodes(20, 1)
    for s in range(4):
        roles = part.roles(s)
        for i in range(4):
            assert (roles[i] == part.quarters[(s + i) % 4]).all()
    for node in range(20):
        assert node in part.quarters[part.quarter_of()[node]]


def test_uniform_membership():
    # each node lands in each quarter about equally often
    hits = np.zeros(4)
    for seed in range(400):
        hits[partition_nodes(40, seed).quarter_of()[0]] += 1
    assert (np.abs(hits - 100) < 4 * np.sqrt(400 * 0.25 * 0.75)).all()
