"""Directed-cycle finding, cycle signatures and cycle removal.

The finder reduces the adjacency matrix to nodes that can sit on a cycle,
grows branches from each surviving root until a node repeats, trims every
branch back to the repeated node and converts the loop into edge indices
and edge states.  Each directed cycle is identified by its length and by

    decimal = sum over cycle edges k of (S_k * 3**k + k)

with ``k`` the 1-based edge index, computed as an exact Python int.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .graph import ABSENT, FORWARD, REVERSE, CandidateGraph, GraphError, Prior, states_to_adjacency

log = logging.getLogger(__name__)

DEFAULT_CATALOG_CAP = 10_000


class CycleError(RuntimeError):
    pass


class UnsatisfiableRepair(CycleError):
    """A directed cycle whose edges are all pinned by constraints."""


# --- cycle finder -----------------------------------------------------------

def reduce_adjacency(A) -> tuple[np.ndarray, list[int]]:
    """Drop nodes that cannot lie on a cycle.

    Adds ``A`` to its transpose and repeatedly deletes rows whose degree
    among the remaining nodes is below two.  Returns the symmetric matrix
    restricted to the survivors and the surviving (original) row indices.
    """
    A = np.asarray(A, dtype=np.int64)
    sym = A + A.T
    keep = list(range(A.shape[0]))
    while True:
        sub = sym[np.ix_(keep, keep)]
        deg = (sub > 0).sum(axis=1)
        nxt = [k for k, d in zip(keep, deg) if d >= 2]
        if len(nxt) == len(keep) or len(nxt) <= 2:
            keep = nxt
            break
        keep = nxt
    if len(keep) <= 2:
        keep = []
    return sym[np.ix_(keep, keep)], keep


def trim_branch(branch: Sequence[int]) -> tuple[int, ...]:
    """Cut a branch back to the earlier occurrence of its leaf."""
    branch = tuple(branch)
    if len(branch) < 2:
        raise CycleError("branch too short to close a cycle")
    leaf = branch[-1]
    for i in range(len(branch) - 2, -1, -1):
        if branch[i] == leaf:
            return branch[i:]
    raise CycleError(f"leaf {leaf} does not repeat in branch {branch}")


def branch_to_coordinates(trimmed: Sequence[int]) -> list[tuple[int, int]]:
    if len(trimmed) < 2 or trimmed[0] != trimmed[-1]:
        raise CycleError("branch must start and end at the same node")
    return [(trimmed[i], trimmed[i + 1]) for i in range(len(trimmed) - 1)]


def coordinates_to_states(coords) -> list[int]:
    return [FORWARD if u < v else REVERSE for u, v in coords]


def coordinates_to_edge_indices(coords, g: CandidateGraph) -> list[int]:
    return [g.edge_index(u, v) for u, v in coords]


_POW3 = [1]


def _pow3(k: int) -> int:
    while len(_POW3) <= k:
        _POW3.append(_POW3[-1] * 3)
    return _POW3[k]


def cycle_decimal(edge_indices: Sequence[int], edge_states: Sequence[int], m: int | None = None) -> int:
    """Integer code of a directed cycle; ``edge_indices`` are 0-based."""
    if len(set(edge_indices)) != len(edge_indices):
        raise CycleError("repeated edge in cycle")
    total = 0
    for i, st in zip(edge_indices, edge_states):
        if st not in (FORWARD, REVERSE):
            raise CycleError(f"edge {i + 1} has state {st}; cycle edges must be directed")
        if i < 0 or (m is not None and i >= m):
            raise CycleError(f"edge index {i + 1} out of range")
        k = i + 1
        total += (_pow3(k) if st else 0) + k
    return total


@dataclass(frozen=True)
class DirectedCycle:
    edges: tuple[int, ...]
    states: tuple[int, ...]
    decimal: int

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def signature(self) -> tuple[int, int]:
        return (self.length, self.decimal)

    @cached_property
    def key(self) -> frozenset:
        return frozenset(zip(self.edges, self.states))

    @classmethod
    def from_coordinates(cls, coords, g: CandidateGraph) -> "DirectedCycle":
        idx = coordinates_to_edge_indices(coords, g)
        st = coordinates_to_states(coords)
        return cls(tuple(idx), tuple(st), cycle_decimal(idx, st, g.m))


def _cycle_from_loop(loop: Sequence[int], index: dict) -> DirectedCycle:
    """Same result as the coordinate/state/index steps, fused for the finder's inner loop."""
    edges, states, total = [], [], 0
    for a, b in zip(loop, loop[1:]):
        if a < b:
            e, st = index[(a, b)], FORWARD
        else:
            e, st = index[(b, a)], REVERSE
        edges.append(e)
        states.append(st)
        total += (_pow3(e + 1) if st else 0) + e + 1
    return DirectedCycle(tuple(edges), tuple(states), total)


def _branches(adj: dict[int, list[int]], root: int):
    """Depth-first branch growth; yields every branch whose leaf repeats."""
    stack = [(root,)]
    while stack:
        branch = stack.pop()
        children = adj.get(branch[-1], ())
        # reversed so the smallest child is explored first
        for c in reversed(children):
            nb = branch + (c,)
            if c in branch:
                yield nb
            else:
                stack.append(nb)


def find_directed_cycles(A, g: CandidateGraph) -> list[DirectedCycle]:
    """All simple directed cycles of ``A`` (every arc must be a candidate edge)."""
    A = np.asarray(A)
    if A.shape != (g.b, g.b):
        raise GraphError("adjacency matrix does not match candidate graph")
    rows, cols = np.nonzero(A)
    arcs = list(zip(rows.tolist(), cols.tolist()))
    for u, v in arcs:
        if not g.has_edge(u, v) or A[v, u]:
            raise GraphError(f"arc {u + 1}->{v + 1} is inconsistent with the candidate graph")

    index = {e: i for i, e in enumerate(g.edges)}
    found: list[DirectedCycle] = []
    remaining = np.array(A, dtype=np.int8)
    while True:
        _, survivors = reduce_adjacency(remaining)
        if not survivors:
            break
        alive = set(survivors)
        adj = {
            u: [v for v in np.nonzero(remaining[u])[0].tolist() if v in alive]
            for u in survivors
        }
        root = survivors[0]
        for branch in _branches(adj, root):
            # a loop closing elsewhere avoids the root; it is found again, once
            # its own smallest node becomes the root, so only root loops are kept
            if branch[-1] != root:
                continue
            trimmed = trim_branch(branch)
            if len(trimmed) < 4:
                continue
            found.append(_cycle_from_loop(trimmed, index))
        # every cycle through the root has been seen; drop it and continue
        remaining[root, :] = 0
        remaining[:, root] = 0
    return sorted(found, key=lambda c: (c.length, c.decimal, c.edges))


# --- catalog of skeleton cycles ---------------------------------------------

@dataclass(frozen=True)
class SkeletonCycle:
    """A simple cycle of the undirected skeleton with both directed orientations."""

    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    forward: DirectedCycle
    backward: DirectedCycle

    @property
    def orientations(self) -> tuple[DirectedCycle, DirectedCycle]:
        return (self.forward, self.backward)


def _cycle_from_nodes(nodes: Sequence[int], g: CandidateGraph) -> DirectedCycle:
    loop = list(nodes) + [nodes[0]]
    return DirectedCycle.from_coordinates(branch_to_coordinates(loop), g)


def skeleton_cycles(g: CandidateGraph, cap: int | None = None) -> list[tuple[int, ...]] | None:
    """Node sequences of the simple cycles of the skeleton (None if more than ``cap``)."""
    nbrs = [[] for _ in range(g.b)]
    for u, v in g.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    for n in nbrs:
        n.sort()
    out = []
    for s in range(g.b):
        stack = [(s, (s,))]
        while stack:
            node, path = stack.pop()
            for w in reversed(nbrs[node]):
                if w == s and len(path) >= 3 and path[1] < path[-1]:
                    out.append(path)
                    if cap is not None and len(out) > cap:
                        return None
                elif w > s and w not in path:
                    stack.append((w, path + (w,)))
    return out


class CycleCatalog:
    """Every simple skeleton cycle with its two directed signatures.

    When the skeleton has more than ``cap`` simple cycles the catalog is
    left empty with ``overflow`` set, and detection falls back to running
    the finder on each state vector.
    """

    def __init__(self, g: CandidateGraph, cap: int = DEFAULT_CATALOG_CAP):
        self.graph = g
        self.cap = cap
        paths = skeleton_cycles(g, cap)
        self.overflow = paths is None
        self.cycles: list[SkeletonCycle] = []
        if not self.overflow:
            for nodes in paths:
                fwd = _cycle_from_nodes(nodes, g)
                bwd = _cycle_from_nodes(tuple(reversed(nodes)), g)
                self.cycles.append(SkeletonCycle(tuple(nodes), tuple(sorted(fwd.edges)), fwd, bwd))
            self.cycles.sort(key=lambda c: (len(c.edges), c.edges))
        self._by_edge: list[list[int]] = [[] for _ in range(g.m)]
        self._patterns = []
        for ci, c in enumerate(self.cycles):
            for e in c.edges:
                self._by_edge[e].append(ci)
            pats = []
            for o in c.orientations:
                lookup = dict(zip(o.edges, o.states))
                pats.append(tuple(lookup[e] for e in c.edges))
            self._patterns.append((c.edges, pats[0], pats[1]))
        self.collisions = self._check_signatures()

    def _check_signatures(self) -> list[tuple[DirectedCycle, DirectedCycle]]:
        seen: dict[tuple[int, int], DirectedCycle] = {}
        clashes = []
        for c in self.cycles:
            for o in c.orientations:
                other = seen.setdefault(o.signature, o)
                if other is not o and other.key != o.key:
                    clashes.append((other, o))
        if clashes:
            log.warning("%d (length, decimal) signature collisions in cycle catalog; "
                        "matching uses exact edge states", len(clashes))
        return clashes

    def __len__(self) -> int:
        return len(self.cycles)

    def signatures(self) -> list[tuple[int, int]]:
        return [o.signature for c in self.cycles for o in c.orientations]

    def cycles_through(self, edges) -> list[int]:
        ids = set()
        for e in edges:
            ids.update(self._by_edge[e])
        return sorted(ids)

    def match(self, s: Sequence[int], ci: int) -> DirectedCycle | None:
        edges, a, b = self._patterns[ci]
        st = tuple(s[e] for e in edges)
        if st == a:
            return self.cycles[ci].forward
        if st == b:
            return self.cycles[ci].backward
        return None


def build_cycle_catalog(g: CandidateGraph, cap: int = DEFAULT_CATALOG_CAP) -> CycleCatalog:
    return CycleCatalog(g, cap)


def detect_cycles(s: Sequence[int], catalog: CycleCatalog, edges=None) -> list[DirectedCycle]:
    """Directed cycles present in ``s``, in catalog order.

    ``edges`` restricts the search to cycles through those edges, which is
    enough when ``s`` differs from an acyclic vector only on them.
    """
    if catalog.overflow:
        A = states_to_adjacency(catalog.graph, s)
        found = find_directed_cycles(A, catalog.graph)
        if edges is not None:
            wanted = set(edges)
            found = [c for c in found if wanted.intersection(c.edges)]
        return found
    ids = range(len(catalog.cycles)) if edges is None else catalog.cycles_through(edges)
    out = []
    for ci in ids:
        hit = catalog.match(s, ci)
        if hit is not None:
            out.append(hit)
    return out


def _still_present(s, cyc: DirectedCycle) -> bool:
    return all(s[e] == st for e, st in zip(cyc.edges, cyc.states))


def remove_cycles(s: Sequence[int], catalog: CycleCatalog, prior: Prior, allowed, rng,
                  edges=None) -> list[int]:
    """Break every directed cycle of ``s`` by changing one edge per cycle.

    The edge is picked uniformly among the cycle's edges that have another
    allowed state, and its new state is drawn in proportion to the prior.
    Cycles are handled in catalog order within a round and the vector is
    re-scanned after each round.  Returns a new list.
    """
    s = list(s)
    cap = 100 * (len(catalog) + 1)
    rounds = 0
    scope = None if edges is None else set(edges)
    while True:
        found = detect_cycles(s, catalog, scope)
        if not found:
            return s
        rounds += 1
        if rounds > cap:
            raise CycleError(f"cycle removal did not finish after {cap} rounds")
        for cyc in found:
            if not _still_present(s, cyc):
                continue
            free = [e for e in cyc.edges if len(allowed[e]) > 1]
            if not free:
                raise UnsatisfiableRepair(
                    f"directed cycle on edges {[e + 1 for e in cyc.edges]} cannot be broken "
                    "under the edge constraints")
            e = free[rng.index(len(free))]
            targets, weights = prior.switch_targets(s[e], allowed[e])
            if not targets:
                raise UnsatisfiableRepair(f"edge {e + 1} has no reachable state with positive prior")
            s[e] = targets[rng.weighted(weights)]
            if scope is not None:
                scope.add(e)
