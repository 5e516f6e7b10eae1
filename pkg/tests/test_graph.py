import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opinion_env.errors import DuplicateEdge, IndexOutOfRange, IsolatedVertex, LengthMismatch, SelfLoop
from opinion_env.graph import (
    apply_normalized_adjacency, build_graph, is_connected, load_graph, random_connected_graph, triangle,
)


def test_triangle_degrees():
    assert triangle().degrees == (2, 2, 2)


def test_path_degrees():
    assert build_graph(2, [(0, 1)]).degrees == (1, 1)


@pytest.mark.parametrize("n, edges, exc", [
    (3, [(0, 1)], IsolatedVertex),
    (2, [(0, 2)], IndexOutOfRange),
    (2, [(1, 1), (0, 1)], SelfLoop),
    (2, [(0, 1), (1, 0)], DuplicateEdge),
    (1, [], IsolatedVertex),
])
def test_rejections(n, edges, exc):
    with pytest.raises(exc):
        build_graph(n, edges)


def test_connectivity():
    assert is_connected(triangle())
    assert not is_connected(build_graph(4, [(0, 1), (2, 3)]))


class TestAveraging:
    def test_ones_fixed(self):
        assert np.array_equal(apply_normalized_adjacency(triangle(), np.ones(3)), np.ones(3))

    def test_path_swaps(self):
        g = build_graph(2, [(0, 1)])
        assert np.allclose(apply_normalized_adjacency(g, [0.3, -0.7]), [-0.7, 0.3], rtol=0, atol=1e-15)

    def test_star(self):
        g = build_graph(4, [(0, 1), (0, 2), (0, 3)])
        assert apply_normalized_adjacency(g, [0, 1, 1, 1]).tolist() == [1, 0, 0, 0]

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            apply_normalized_adjacency(triangle(), [1.0, 2.0])

    def test_matches_dense_operator(self, rng):
        for _ in range(10):
            g = random_connected_graph(int(rng.integers(2, 25)), rng)
            a = g.adjacency()
            assert np.array_equal(a, a.T)
            v = rng.normal(size=g.n)
            dense = (a @ v) / a.sum(axis=1)
            assert np.allclose(apply_normalized_adjacency(g, v), dense, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**32 - 1))
def test_averaging_bounds(n, seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(n, rng)
    v = rng.uniform(-5, 5, n)
    w = apply_normalized_adjacency(g, v)
    assert np.all(w >= v.min() - 1e-12) and np.all(w <= v.max() + 1e-12)
    assert np.max(np.abs(apply_normalized_adjacency(g, np.ones(n)) - 1.0)) <= 1e-15


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**32 - 1))
def test_iteration_reaches_consensus(n, seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(n, rng)
    # bipartite graphs have eigenvalue -1 for D^-1 A; iterate the lazy walk there
    lazy = nx.is_bipartite(nx.Graph(list(g.edges)))
    v = rng.uniform(-1, 1, n)
    for _ in range(10_000):
        w = apply_normalized_adjacency(g, v)
        v = 0.5 * (v + w) if lazy else w
    assert v.max() - v.min() < 1e-8


def test_random_graphs_connected(rng):
    for _ in range(20):
        g = random_connected_graph(int(rng.integers(2, 21)), rng)
        assert is_connected(g)
        assert nx.is_connected(nx.Graph(list(g.edges)))


def test_load_graph(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2]]}))
    assert load_graph(p).degrees == (1, 2, 1)
    p.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2]], "weights": [1, 2]}))
    with pytest.raises(ValueError):
        load_graph(p)
