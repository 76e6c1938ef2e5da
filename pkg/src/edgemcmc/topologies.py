"""Benchmark topologies and linear-Gaussian data simulation.

Edge lists are 1-based ``(parent, child)`` arcs.  False-edge variants add
undirected candidate pairs that are absent from the generating DAG.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CandidateGraph, GraphError, parent_sets, topological_order
from .score import DataMatrix


@dataclass(frozen=True)
class Topology:
    name: str
    b: int
    arcs: tuple[tuple[int, int], ...]
    false_edges: tuple[tuple[int, int], ...] = ()
    base: str = ""

    def __post_init__(self):
        pairs = [tuple(sorted(a)) for a in self.arcs]
        if len(set(pairs)) != len(pairs):
            raise GraphError(f"{self.name}: repeated pair")
        for u, v in list(self.arcs) + list(self.false_edges):
            if not (1 <= u <= self.b and 1 <= v <= self.b) or u == v:
                raise GraphError(f"{self.name}: bad edge ({u}, {v})")
        if set(tuple(sorted(f)) for f in self.false_edges) & set(pairs):
            raise GraphError(f"{self.name}: false edge overlaps a true edge")
        g, s = self._true_graph()
        if topological_order(g.b, parent_sets(g, s)) is None:
            raise GraphError(f"{self.name}: arcs contain a directed cycle")

    def _true_graph(self):
        g = CandidateGraph.from_pairs(self.b, [(u - 1, v - 1) for u, v in self.arcs])
        return g, _orient(g, self.arcs)

    def candidate(self) -> CandidateGraph:
        """Skeleton of the true DAG plus any false edges."""
        pairs = [(u - 1, v - 1) for u, v in self.arcs] + [(u - 1, v - 1) for u, v in self.false_edges]
        return CandidateGraph.from_pairs(self.b, pairs)

    def true_states(self, g: CandidateGraph | None = None) -> tuple[int, ...]:
        """State vector of the generating DAG on ``g`` (default: :meth:`candidate`)."""
        g = g if g is not None else self.candidate()
        return _orient(g, self.arcs)

    def parents(self) -> list[list[int]]:
        ps: list[list[int]] = [[] for _ in range(self.b)]
        for u, v in self.arcs:
            ps[v - 1].append(u - 1)
        return [sorted(p) for p in ps]

    def true_pair_set(self) -> set[tuple[int, int]]:
        return {(min(u, v) - 1, max(u, v) - 1) for u, v in self.arcs}

    def false_pair_set(self) -> set[tuple[int, int]]:
        return {(min(u, v) - 1, max(u, v) - 1) for u, v in self.false_edges}

    def with_false_edges(self, name: str, false_edges) -> "Topology":
        return Topology(name, self.b, self.arcs, tuple(false_edges), self.base or self.name)

    @property
    def data_name(self) -> str:
        """Name of the topology whose simulated data this one reuses."""
        return self.base or self.name


def _orient(g: CandidateGraph, arcs) -> tuple[int, ...]:
    s = [2] * g.m
    for u, v in arcs:
        i = g.edge_index(u - 1, v - 1)
        s[i] = 0 if u < v else 1
    return tuple(s)


_BASE = {
    "M1": Topology("M1", 3, ((1, 2), (2, 3))),
    "M2": Topology("M2", 3, ((1, 2), (3, 2))),
    "GN4": Topology("GN4", 4, ((1, 2), (1, 3), (2, 4), (4, 3))),
    "GN5": Topology("GN5", 5, ((1, 2), (1, 3), (2, 4), (3, 5), (4, 5))),
    "multiparent": Topology("multiparent", 4, ((1, 4), (2, 4), (3, 4))),
    "GN8": Topology("GN8", 8, ((1, 2), (1, 6), (1, 8), (2, 3), (2, 5), (5, 6), (5, 8), (6, 7))),
    "GN11": Topology("GN11", 11, ((1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (7, 6),
                                  (7, 8), (8, 9), (9, 10), (10, 11))),
}

_FALSE = {
    "m1f": ("M1", ((1, 3),)),
    "m2f": ("M2", ((1, 3),)),
    "gn4f": ("GN4", ((2, 3),)),
    "gn11f": ("GN11", ((1, 3), (1, 11))),
}

CATALOG: dict[str, Topology] = dict(_BASE)
for _name, (_base, _fe) in _FALSE.items():
    CATALOG[_name] = _BASE[_base].with_false_edges(_name, _fe)

BASE_NAMES = tuple(_BASE)


def get_topology(name: str) -> Topology:
    for key, topo in CATALOG.items():
        if key.lower() == name.lower():
            return topo
    raise KeyError(f"unknown topology {name!r}; known: {', '.join(CATALOG)}")


def simulate(topo: Topology, n: int, beta: float, seed) -> DataMatrix:
    """Each node is ``beta * (sum of its parents) + N(0, 1)``, zero intercept."""
    if n < 2:
        raise ValueError("need at least two observations")
    parents = topo.parents()
    order = topological_order(topo.b, parents)
    if order is None:
        raise GraphError(f"{topo.name} has a directed cycle")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, topo.b))
    X = np.zeros((n, topo.b))
    for k in order:
        X[:, k] = noise[:, k]
        for j in parents[k]:
            X[:, k] += beta * X[:, j]
    return DataMatrix.from_array(X, [f"T{j + 1}" for j in range(topo.b)])
