"""Candidate graphs, edge-state vectors and adjacency matrices.

Nodes are 0-based internally and 1-based in every file or printed label.
Edge ``i`` of a candidate graph joins ``lo < hi``; its state is

* ``0`` -- forward, ``lo -> hi``
* ``1`` -- reverse, ``hi -> lo``
* ``2`` -- absent
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

FORWARD, REVERSE, ABSENT = 0, 1, 2
STATES = (FORWARD, REVERSE, ABSENT)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class CandidateGraph:
    """Node count plus the sorted list of undirected candidate edges.

    The position of an edge in ``edges`` is its index everywhere else
    (state vectors, cycle codes, posterior tables).
    """

    b: int
    edges: tuple[tuple[int, int], ...]
    names: tuple[str, ...] | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.b < 0:
            raise GraphError("node count must be non-negative")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < v < self.b):
                raise GraphError(f"bad candidate edge ({u + 1}, {v + 1})")
        if list(edges) != sorted(set(edges)):
            raise GraphError("candidate edges must be unique and sorted by (lo, hi)")
        if self.names is not None and len(self.names) != self.b:
            raise GraphError("need one name per node")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(edges)})

    @classmethod
    def from_pairs(cls, b: int, pairs: Iterable[tuple[int, int]], names=None) -> "CandidateGraph":
        """Build from unordered 0-based pairs in any order (duplicates rejected)."""
        norm = [(min(u, v), max(u, v)) for u, v in pairs]
        if any(u == v for u, v in norm):
            raise GraphError("self-loops are not allowed")
        if len(set(norm)) != len(norm):
            raise GraphError("duplicate candidate edge")
        return cls(b, tuple(sorted(norm)), tuple(names) if names is not None else None)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_index(self, u: int, v: int) -> int:
        """Index of the candidate edge joining ``u`` and ``v`` (either order)."""
        key = (u, v) if u < v else (v, u)
        try:
            return self._index[key]
        except KeyError:
            raise GraphError(f"({u + 1}, {v + 1}) is not a candidate edge") from None

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._index

    def node_names(self) -> list[str]:
        if self.names is not None:
            return list(self.names)
        return [f"T{j + 1}" for j in range(self.b)]

    def skeleton(self) -> np.ndarray:
        A = np.zeros((self.b, self.b), dtype=np.int8)
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1
        return A


def _check_binary_square(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphError("adjacency matrix must be square")
    if not np.isin(A, (0, 1)).all():
        raise GraphError("adjacency matrix must be binary")
    if np.any(np.diag(A) != 0):
        raise GraphError("adjacency matrix has a nonzero diagonal (self-loop)")
    return A.astype(np.int8)


def candidate_from_adjacency(A, names=None) -> CandidateGraph:
    """One candidate edge per pair with ``A[j,k]`` or ``A[k,j]`` set."""
    A = _check_binary_square(A)
    S = A | A.T
    lo, hi = np.nonzero(np.triu(S, 1))
    return CandidateGraph(A.shape[0], tuple(zip(lo.tolist(), hi.tolist())), names)


def fully_connected(b: int, names=None) -> CandidateGraph:
    if b < 1:
        raise GraphError("need at least one node")
    edges = tuple((j, k) for j in range(b) for k in range(j + 1, b))
    return CandidateGraph(b, edges, tuple(names) if names is not None else None)


def _check_states(g: CandidateGraph, s: Sequence[int]):
    if len(s) != g.m:
        raise GraphError(f"state vector has length {len(s)}, graph has {g.m} edges")


def states_to_adjacency(g: CandidateGraph, s: Sequence[int]) -> np.ndarray:
    _check_states(g, s)
    A = np.zeros((g.b, g.b), dtype=np.int8)
    for (u, v), st in zip(g.edges, s):
        if st == FORWARD:
            A[u, v] = 1
        elif st == REVERSE:
            A[v, u] = 1
        elif st != ABSENT:
            raise GraphError(f"invalid edge state {st}")
    return A


def adjacency_to_states(g: CandidateGraph, A) -> tuple[int, ...]:
    """Inverse of :func:`states_to_adjacency` for a directed matrix on ``g``."""
    A = _check_binary_square(A)
    if A.shape[0] != g.b:
        raise GraphError("matrix size does not match node count")
    if np.any(A & A.T):
        raise GraphError("both directions set for one pair")
    out = []
    for u, v in g.edges:
        out.append(FORWARD if A[u, v] else REVERSE if A[v, u] else ABSENT)
    rows, cols = np.nonzero(A)
    for u, v in zip(rows.tolist(), cols.tolist()):
        if not g.has_edge(u, v):
            raise GraphError(f"directed edge {u + 1}->{v + 1} is not a candidate edge")
    return tuple(out)


def parent_sets(g: CandidateGraph, s: Sequence[int]) -> list[list[int]]:
    _check_states(g, s)
    parents: list[list[int]] = [[] for _ in range(g.b)]
    for (u, v), st in zip(g.edges, s):
        if st == FORWARD:
            parents[v].append(u)
        elif st == REVERSE:
            parents[u].append(v)
    for p in parents:
        p.sort()
    return parents


@dataclass(frozen=True)
class EdgeConstraint:
    edge: int
    allowed: frozenset

    def __post_init__(self):
        allowed = frozenset(int(x) for x in self.allowed)
        if not allowed or not allowed <= set(STATES):
            raise GraphError(f"edge {self.edge + 1}: allowed states must be a nonempty subset of {{0,1,2}}")
        object.__setattr__(self, "allowed", allowed)


def allowed_states(m: int, constraints: Iterable[EdgeConstraint] | None = None) -> list[tuple[int, ...]]:
    """Per-edge sorted tuple of permitted states (intersection of all constraints)."""
    allowed = [set(STATES) for _ in range(m)]
    for c in constraints or ():
        if not 0 <= c.edge < m:
            raise GraphError(f"constraint on unknown edge {c.edge + 1}")
        allowed[c.edge] &= c.allowed
        if not allowed[c.edge]:
            raise GraphError(f"constraints leave edge {c.edge + 1} with no allowed state")
    return [tuple(sorted(a)) for a in allowed]


def forbid_parent(g: CandidateGraph, parent: int, child: int) -> EdgeConstraint:
    """Constraint stating that ``parent`` may never point into ``child``."""
    i = g.edge_index(parent, child)
    banned = FORWARD if parent < child else REVERSE
    return EdgeConstraint(i, frozenset(set(STATES) - {banned}))


def topological_order(b: int, parents: Sequence[Sequence[int]]) -> list[int] | None:
    """Kahn ordering, or None when the parent lists contain a directed cycle."""
    indeg = [len(p) for p in parents]
    children: list[list[int]] = [[] for _ in range(b)]
    for k, ps in enumerate(parents):
        for j in ps:
            children[j].append(k)
    ready = [k for k in range(b) if indeg[k] == 0]
    order = []
    while ready:
        k = ready.pop(0)
        order.append(k)
        for c in children[k]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return order if len(order) == b else None


def is_acyclic(g: CandidateGraph, s: Sequence[int]) -> bool:
    return topological_order(g.b, parent_sets(g, s)) is not None


@dataclass(frozen=True)
class Prior:
    """Prior probability of each edge state, independent across edges."""

    p0: float
    p1: float
    p2: float

    def __post_init__(self):
        ps = (self.p0, self.p1, self.p2)
        if any(p < 0 for p in ps) or abs(sum(ps) - 1.0) > 1e-9:
            raise GraphError(f"prior {ps} must be non-negative and sum to 1")

    @classmethod
    def parse(cls, text: str) -> "Prior":
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 3:
            raise GraphError("prior needs three comma-separated probabilities")
        return cls(*parts)

    def __iter__(self):
        return iter((self.p0, self.p1, self.p2))

    def __getitem__(self, k: int) -> float:
        return (self.p0, self.p1, self.p2)[k]

    def check_allowed(self, allowed: Sequence[Sequence[int]]):
        """Every state an edge may take needs positive prior mass."""
        for i, states in enumerate(allowed):
            for k in states:
                if self[k] <= 0 and len(states) > 1:
                    raise GraphError(
                        f"edge {i + 1}: state {k} is allowed but has zero prior probability"
                    )

    def initial_weights(self, allowed: Sequence[int]) -> list[float]:
        w = [self[k] for k in allowed]
        if sum(w) <= 0:
            raise GraphError(f"prior puts no mass on allowed states {tuple(allowed)}")
        return w

    def switch_prob(self, old: int, new: int, allowed: Sequence[int] = STATES) -> float:
        """Probability that an edge picked for a change moves from ``old`` to ``new``."""
        if new == old or new not in allowed:
            return 0.0
        denom = sum(self[k] for k in allowed if k != old)
        if denom <= 0:
            return 0.0
        return self[new] / denom

    def switch_targets(self, old: int, allowed: Sequence[int]) -> tuple[list[int], list[float]]:
        targets = [k for k in allowed if k != old and self[k] > 0]
        return targets, [self[k] for k in targets]
