import itertools
import random

import networkx as nx
import numpy as np
import pytest

from edgemcmc.cycles import (CycleError, UnsatisfiableRepair, branch_to_coordinates,
                             build_cycle_catalog, coordinates_to_edge_indices,
                             coordinates_to_states, cycle_decimal, detect_cycles,
                             find_directed_cycles, reduce_adjacency, remove_cycles, trim_branch)
from edgemcmc.graph import (CandidateGraph, EdgeConstraint, GraphError, Prior, allowed_states,
                            is_acyclic, states_to_adjacency)
from edgemcmc.rng import Stream
from edgemcmc.topologies import get_topology

# Nested-cycle graph: 7 edges on 6 nodes, an outer 6-cycle with a chord.
NESTED = CandidateGraph.from_pairs(6, [(0, 1), (0, 2), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5)])
NESTED_S = (0, 0, 1, 0, 0, 0, 0)
PRIOR = Prior(0.05, 0.05, 0.9)


def nx_cycles(A, g):
    """Simple directed cycles as frozensets of 0-based edge indices."""
    G = nx.DiGraph([tuple(x) for x in np.argwhere(A)])
    out = set()
    for nodes in nx.simple_cycles(G):
        if len(nodes) < 3:
            continue
        loop = nodes + [nodes[0]]
        out.add(frozenset(g.edge_index(a, b) for a, b in zip(loop, loop[1:])))
    return out


def finder_cycles(A, g):
    return {frozenset(c.edges) for c in find_directed_cycles(A, g)}


def test_reduce_adjacency_examples():
    A = np.zeros((2, 2), dtype=int)
    A[0, 1] = 1
    assert reduce_adjacency(A)[1] == []
    tri = np.zeros((3, 3), dtype=int)
    tri[0, 1] = tri[1, 2] = tri[2, 0] = 1
    assert reduce_adjacency(tri)[1] == [0, 1, 2]
    assert reduce_adjacency(states_to_adjacency(NESTED, NESTED_S))[1] == list(range(6))


def test_reduce_drops_pendant_chain():
    # triangle with a tail 2 -> 3 -> 4
    A = np.zeros((5, 5), dtype=int)
    for u, v in [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]:
        A[u, v] = 1
    assert reduce_adjacency(A)[1] == [0, 1, 2]


def test_trim_and_coordinates():
    assert trim_branch((3, 4, 1, 6, 5, 2, 1)) == (1, 6, 5, 2, 1)
    assert trim_branch((1, 2, 3, 1)) == (1, 2, 3, 1)
    assert trim_branch((5, 5)) == (5, 5)
    with pytest.raises(CycleError):
        trim_branch((1, 2, 3))
    assert branch_to_coordinates((1, 6, 5, 2, 1)) == [(1, 6), (6, 5), (5, 2), (2, 1)]
    assert branch_to_coordinates((2, 4, 3, 2)) == [(2, 4), (4, 3), (3, 2)]
    assert coordinates_to_states([(1, 6), (6, 5), (5, 2), (2, 1)]) == [0, 1, 1, 1]


def test_coordinates_to_indices_on_triangle():
    tri = CandidateGraph.from_pairs(3, [(0, 1), (0, 2), (1, 2)])
    coords = [(0, 1), (1, 2), (2, 0)]
    assert coordinates_to_states(coords) == [0, 0, 1]
    assert [i + 1 for i in coordinates_to_edge_indices(coords, tri)] == [1, 3, 2]
    with pytest.raises(GraphError):
        coordinates_to_edge_indices([(0, 1), (1, 3)], CandidateGraph.from_pairs(4, [(0, 1)]))


def test_cycle_decimal_values():
    # indices are 0-based here; the code counts them from 1
    assert cycle_decimal([1, 2, 4, 5, 6], [0, 1, 0, 0, 0]) == 50
    assert cycle_decimal([0, 2, 3, 4, 5, 6], [0, 1, 0, 0, 0, 0]) == 53
    assert cycle_decimal([0], [0]) == 1
    with pytest.raises(CycleError):
        cycle_decimal([0, 1], [0, 2])
    with pytest.raises(CycleError):
        cycle_decimal([7], [0], m=7)


def test_cycle_decimal_rotation_invariant():
    idx, st = [1, 2, 4, 5, 6], [0, 1, 0, 0, 0]
    for r in range(5):
        assert cycle_decimal(idx[r:] + idx[:r], st[r:] + st[:r]) == 50


def test_nested_cycles_found():
    found = find_directed_cycles(states_to_adjacency(NESTED, NESTED_S), NESTED)
    assert [c.length for c in found] == [5, 6]
    assert {c.decimal for c in found} == {50, 53}
    shared = set(found[0].edges) & set(found[1].edges)
    assert len(shared) == 4


def test_finder_examples_on_square():
    g = CandidateGraph.from_pairs(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    assert find_directed_cycles(states_to_adjacency(g, (0, 0, 0, 1)), g) == []
    # T1 -> T3 -> T4 -> T2 -> T1
    found = find_directed_cycles(states_to_adjacency(g, (1, 0, 1, 0)), g)
    assert len(found) == 1 and found[0].length == 4


def test_finder_rejects_inconsistent_matrix():
    g = CandidateGraph.from_pairs(3, [(0, 1)])
    A = np.zeros((3, 3), dtype=int)
    A[0, 2] = 1
    with pytest.raises(GraphError):
        find_directed_cycles(A, g)


def _all_orientations(g):
    for s in itertools.product((0, 1), repeat=g.m):
        yield s


@pytest.mark.parametrize("name", ["M1", "M2", "GN4", "GN5", "multiparent", "GN8", "m1f", "gn4f"])
def test_finder_matches_networkx_on_catalog_skeletons(name):
    g = get_topology(name).candidate()
    for s in _all_orientations(g):
        A = states_to_adjacency(g, s)
        assert finder_cycles(A, g) == nx_cycles(A, g), s


def test_finder_matches_networkx_on_random_skeletons():
    rnd = random.Random(11)
    for _ in range(200):
        b = rnd.randint(3, 7)
        pairs = [p for p in itertools.combinations(range(b), 2) if rnd.random() < 0.55]
        g = CandidateGraph.from_pairs(b, pairs)
        s = [rnd.choice((0, 1, 2)) for _ in range(g.m)]
        A = states_to_adjacency(g, s)
        assert finder_cycles(A, g) == nx_cycles(A, g)


def test_catalog_sizes():
    assert len(build_cycle_catalog(get_topology("GN4").candidate())) == 1
    assert len(build_cycle_catalog(get_topology("GN8").candidate())) == 3
    assert len(build_cycle_catalog(get_topology("multiparent").candidate())) == 0
    cat = build_cycle_catalog(get_topology("GN4").candidate())
    assert len(set(cat.signatures())) == 2


def test_catalog_overflow_cap():
    cat = build_cycle_catalog(CandidateGraph.from_pairs(5, list(itertools.combinations(range(5), 2))),
                              cap=5)
    assert cat.overflow and len(cat) == 0


def test_detect_cycles_examples():
    g = get_topology("GN4").candidate()
    cat = build_cycle_catalog(g)
    assert detect_cycles((0, 0, 0, 1), cat) == []
    assert len(detect_cycles((0, 1, 0, 1), cat)) == 1
    assert detect_cycles((0, 2, 0, 1), cat) == []


@pytest.mark.parametrize("cap", [10_000, 0])
def test_detect_matches_finder_on_random_states(cap):
    rnd = random.Random(5)
    g = CandidateGraph.from_pairs(6, [p for p in itertools.combinations(range(6), 2)
                                      if rnd.random() < 0.7])
    cat = build_cycle_catalog(g, cap=cap)
    for _ in range(300):
        s = [rnd.choice((0, 1, 2)) for _ in range(g.m)]
        got = {c.key for c in detect_cycles(s, cat)}
        want = {c.key for c in find_directed_cycles(states_to_adjacency(g, s), g)}
        assert got == want


def test_signatures_distinct_on_catalog_topologies():
    for name in ["GN4", "GN5", "GN8", "gn4f", "gn11f"]:
        cat = build_cycle_catalog(get_topology(name).candidate())
        assert cat.collisions == []
        assert len(set(cat.signatures())) == 2 * len(cat)


def test_remove_cycles_acyclic_unchanged():
    g = get_topology("GN4").candidate()
    cat = build_cycle_catalog(g)
    assert tuple(remove_cycles((0, 0, 0, 1), cat, PRIOR, allowed_states(4), Stream(1))) == (0, 0, 0, 1)


def test_remove_cycles_single_cycle_one_change():
    g = get_topology("GN4").candidate()
    cat = build_cycle_catalog(g)
    for seed in range(50):
        out = remove_cycles((0, 1, 0, 1), cat, PRIOR, allowed_states(4), Stream(seed))
        assert is_acyclic(g, out)
        assert sum(a != b for a, b in zip(out, (0, 1, 0, 1))) == 1


def test_remove_cycles_two_overlapping():
    cat = build_cycle_catalog(NESTED)
    for seed in range(50):
        out = remove_cycles(NESTED_S, cat, PRIOR, allowed_states(NESTED.m), Stream(seed))
        assert is_acyclic(NESTED, out)


def test_remove_cycles_respects_constraints():
    g = get_topology("GN4").candidate()
    cat = build_cycle_catalog(g)
    allowed = allowed_states(4, [EdgeConstraint(i, frozenset({s}))
                                 for i, s in enumerate((0, 1, 0))])
    out = remove_cycles((0, 1, 0, 1), cat, PRIOR, allowed, Stream(3))
    assert tuple(out[:3]) == (0, 1, 0) and out[3] != 1


def test_remove_cycles_unsatisfiable():
    g = get_topology("GN4").candidate()
    cat = build_cycle_catalog(g)
    allowed = allowed_states(4, [EdgeConstraint(i, frozenset({s}))
                                 for i, s in enumerate((0, 1, 0, 1))])
    with pytest.raises(UnsatisfiableRepair):
        remove_cycles((0, 1, 0, 1), cat, PRIOR, allowed, Stream(3))


def test_signature_collision_does_not_confuse_detection():
    g = CandidateGraph.from_pairs(5, list(itertools.combinations(range(5), 2)))
    cat = build_cycle_catalog(g)
    assert len(cat.collisions) == 2
    a, b = cat.collisions[0]
    assert a.signature == b.signature == (5, 837) and a.key != b.key
    s = [2] * g.m
    for e, st in zip(a.edges, a.states):
        s[e] = st
    assert [c.key for c in detect_cycles(s, cat)] == [a.key]
