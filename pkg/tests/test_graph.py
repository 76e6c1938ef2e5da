import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgemcmc.graph import (ABSENT, CandidateGraph, GraphError, Prior, adjacency_to_states,
                            allowed_states, candidate_from_adjacency, forbid_parent,
                            fully_connected, is_acyclic, parent_sets, states_to_adjacency,
                            topological_order)

GN4 = CandidateGraph.from_pairs(4, [(0, 1), (0, 2), (1, 3), (2, 3)])


def test_candidate_from_zero_matrix():
    g = candidate_from_adjacency(np.zeros((4, 4), dtype=int))
    assert g.edges == () and g.m == 0


def test_candidate_from_gn4_skeleton_sorted():
    A = np.zeros((4, 4), dtype=int)
    for u, v in [(2, 3), (0, 1), (1, 3), (0, 2)]:
        A[u, v] = A[v, u] = 1
    assert candidate_from_adjacency(A).edges == ((0, 1), (0, 2), (1, 3), (2, 3))


@pytest.mark.parametrize("A", [
    np.eye(3, dtype=int),                  # self loop
    np.ones((2, 3), dtype=int),            # not square
    np.array([[0, 2], [2, 0]]),            # not binary
])
def test_candidate_rejects_malformed(A):
    with pytest.raises(GraphError):
        candidate_from_adjacency(A)


def test_fully_connected_sizes():
    assert fully_connected(2).edges == ((0, 1),)
    assert fully_connected(4).m == 6
    assert fully_connected(11).m == 55
    with pytest.raises(GraphError):
        fully_connected(0)


def test_states_to_adjacency_examples():
    g = CandidateGraph.from_pairs(2, [(0, 1)])
    assert states_to_adjacency(g, [0]).tolist() == [[0, 1], [0, 0]]
    assert not states_to_adjacency(g, [2]).any()
    A = states_to_adjacency(GN4, (0, 0, 0, 1))
    assert {tuple(x) for x in np.argwhere(A)} == {(0, 1), (0, 2), (1, 3), (3, 2)}
    with pytest.raises(GraphError):
        states_to_adjacency(GN4, (0, 0))


def test_parent_sets_examples():
    assert parent_sets(GN4, [ABSENT] * 4) == [[], [], [], []]
    v = CandidateGraph.from_pairs(3, [(0, 1), (1, 2)])
    assert parent_sets(v, (0, 1)) == [[], [0, 2], []]
    assert parent_sets(GN4, (0, 0, 0, 1))[2] == [0, 3]


def test_edge_index_and_lookup():
    assert GN4.edge_index(3, 1) == 2
    with pytest.raises(GraphError):
        GN4.edge_index(0, 3)


def test_topological_order_and_acyclic():
    assert topological_order(3, [[], [0], [1]]) == [0, 1, 2]
    assert topological_order(2, [[1], [0]]) is None
    assert is_acyclic(GN4, (0, 0, 0, 1))
    assert not is_acyclic(GN4, (0, 1, 0, 1))


def test_forbid_parent_constraint():
    c = forbid_parent(GN4, 3, 1)  # T4 may not point into T2
    assert c.edge == 2 and c.allowed == {0, 2}
    assert allowed_states(4, [c])[2] == (0, 2)


def test_prior_validation_and_switch():
    p = Prior.parse("0.05,0.05,0.9")
    assert p.switch_prob(0, 2) == pytest.approx(0.9 / 0.95)
    assert p.switch_prob(2, 0) == pytest.approx(0.5)
    with pytest.raises(GraphError):
        Prior(0.5, 0.5, 0.5)
    with pytest.raises(GraphError):
        Prior(-0.1, 0.2, 0.9)


@st.composite
def graph_and_states(draw):
    b = draw(st.integers(2, 7))
    pairs = [(u, v) for u in range(b) for v in range(u + 1, b)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True))
    g = CandidateGraph.from_pairs(b, chosen)
    s = draw(st.lists(st.integers(0, 2), min_size=g.m, max_size=g.m))
    return g, s


@settings(max_examples=200, deadline=None)
@given(graph_and_states())
def test_adjacency_round_trip(gs):
    g, s = gs
    A = states_to_adjacency(g, s)
    assert not np.any(A & A.T)
    sub = candidate_from_adjacency(A | A.T)
    assert set(sub.edges) == {e for e, x in zip(g.edges, s) if x != ABSENT}
    assert tuple(adjacency_to_states(g, A)) == tuple(s)
