import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tradenet.errors import DuplicateEdge, EmptyNetwork, NonPositiveWeight, SelfLoop, TooFewNodes
from tradenet.network import (
    build_network,
    degree_sequence,
    link_density,
    mean_link_weight,
    strength,
)

from conftest import complete


@st.composite
def edge_lists(draw, max_nodes=10):
    n = draw(st.integers(2, max_nodes))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    ws = draw(st.lists(st.floats(1e-6, 1e6), min_size=len(chosen), max_size=len(chosen)))
    # random orientation exercises normalization
    flip = draw(st.lists(st.booleans(), min_size=len(chosen), max_size=len(chosen)))
    edges = [(j, i, w) if f else (i, j, w) for (i, j), w, f in zip(chosen, ws, flip)]
    return n, edges


def test_single_link():
    net = build_network(2, [(0, 1, 5.0)])
    assert (net.n_nodes, net.n_edges) == (2, 1)
    assert strength(net).tolist() == [5.0, 5.0]


def test_triangle(triangle):
    assert triangle.n_edges == 3
    assert strength(triangle).tolist() == [4.0, 3.0, 5.0]
    assert mean_link_weight(triangle) == 2.0
    assert degree_sequence(triangle).tolist() == [2, 2, 2]
    assert link_density(triangle) == 1.0


def test_isolated_node_strength():
    net = build_network(3, [(0, 1, 2.0)])
    assert strength(net).tolist() == [2.0, 2.0, 0.0]


@pytest.mark.parametrize("edges, exc, pair", [
    ([(0, 1, 1), (0, 1, 2)], DuplicateEdge, (0, 1)),
    ([(0, 1, 1), (1, 0, 2)], DuplicateEdge, (0, 1)),
    ([(2, 2, 1)], SelfLoop, (2, 2)),
    ([(0, 2, 0.0)], NonPositiveWeight, (0, 2)),
    ([(0, 2, -1.0)], NonPositiveWeight, (0, 2)),
])
def test_build_errors_name_pair(edges, exc, pair):
    with pytest.raises(exc) as info:
        build_network(3, edges)
    assert info.value.pair == pair


@pytest.mark.parametrize("n, L, expected", [(187, 10252, 0.5895), (76, 1494, 0.524)])
def test_itn_link_densities(n, L, expected):
    pairs = list(itertools.islice(itertools.combinations(range(n), 2), L))
    net = build_network(n, [(i, j, 1.0) for i, j in pairs])
    assert link_density(net) == pytest.approx(L / (n * (n - 1) / 2))
    assert link_density(net) == pytest.approx(expected, abs=5e-4)


def test_density_needs_two_nodes():
    with pytest.raises(TooFewNodes):
        link_density(build_network(1, []))


def test_mean_weight_empty():
    with pytest.raises(EmptyNetwork):
        mean_link_weight(build_network(3, []))


def test_lookup_and_neighbors(triangle):
    assert triangle.has_edge(2, 0)
    assert triangle.weight(2, 1) == 2.0
    assert triangle.weight(0, 0) == 0.0
    assert sorted(triangle.neighbors(1).tolist()) == [0, 2]
    np.testing.assert_array_equal(triangle.weight_matrix(), [[0, 1, 3], [1, 0, 2], [3, 2, 0]])


def test_immutable(triangle):
    with pytest.raises(ValueError):
        triangle.w[0] = 10.0


@given(edge_lists())
def test_handshake_identity(data):
    n, edges = data
    net = build_network(n, edges)
    assert strength(net).sum() == pytest.approx(2 * sum(w for _, _, w in edges), rel=1e-12)
    assert degree_sequence(net).sum() == 2 * len(edges)


@given(edge_lists())
def test_round_trip(data):
    n, edges = data
    net = build_network(n, edges)
    expected = {(min(i, j), max(i, j)): w for i, j, w in edges}
    assert {(i, j): w for i, j, w in net.edges()} == expected


@given(st.integers(2, 30))
def test_complete_graph_density(n):
    assert link_density(complete(n)) == 1.0
