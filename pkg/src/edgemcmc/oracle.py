"""Brute-force ground truth for small graphs.

Markov equivalence classes by skeleton + v-structures, exact posteriors by
enumerating every state vector, and exhaustive enumeration of the
propose-then-repair paths between two state vectors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .cycles import CycleCatalog, build_cycle_catalog, detect_cycles
from .graph import (ABSENT, FORWARD, REVERSE, CandidateGraph, EdgeConstraint, Prior, is_acyclic,
                    parent_sets)
from .sampler import PosteriorTable, effective_allowed
from .score import DataMatrix, ScoreCache

MAX_ORIENT_EDGES = 20
MAX_EXACT_EDGES = 8
MAX_PATH_EDGES = 6


class GuardExceeded(ValueError):
    pass


def enumerate_acyclic_orientations(g: CandidateGraph) -> list[tuple[int, ...]]:
    if g.m > MAX_ORIENT_EDGES:
        raise GuardExceeded(f"{g.m} edges; orientation enumeration is limited to {MAX_ORIENT_EDGES}")
    return [s for s in itertools.product((FORWARD, REVERSE), repeat=g.m) if is_acyclic(g, s)]


def v_structures(g: CandidateGraph, s: Sequence[int]) -> frozenset:
    """Colliders ``a -> c <- b`` with ``a < b`` non-adjacent under ``s``."""
    present = {e for e, st in zip(g.edges, s) if st != ABSENT}
    out = set()
    for c, ps in enumerate(parent_sets(g, s)):
        for a, b in itertools.combinations(ps, 2):
            if (a, b) not in present:
                out.add((a, c, b))
    return frozenset(out)


@dataclass
class EquivalenceClass:
    graph: CandidateGraph
    members: list[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.members)


def equivalence_class(true_dag: Sequence[int], g: CandidateGraph) -> EquivalenceClass:
    """All DAGs on the present edges of ``true_dag`` with its v-structures.

    Absent edges of ``true_dag`` stay absent in every member.
    """
    true_dag = tuple(true_dag)
    if not is_acyclic(g, true_dag):
        raise ValueError("true DAG contains a directed cycle")
    present = [i for i, st in enumerate(true_dag) if st != ABSENT]
    if len(present) > MAX_ORIENT_EDGES:
        raise GuardExceeded(f"{len(present)} present edges exceed the enumeration guard")
    target = v_structures(g, true_dag)
    members = []
    for combo in itertools.product((FORWARD, REVERSE), repeat=len(present)):
        s = list(true_dag)
        for i, st in zip(present, combo):
            s[i] = st
        if is_acyclic(g, s) and v_structures(g, s) == target:
            members.append(tuple(s))
    return EquivalenceClass(g, members)


def expected_edge_probabilities(true_dag: Sequence[int], g: CandidateGraph) -> PosteriorTable:
    """Fraction of equivalence-class members carrying each edge state."""
    cls = equivalence_class(true_dag, g)
    M = np.array(cls.members, dtype=np.int8).reshape(len(cls), g.m)
    probs = np.stack([(M == k).mean(axis=0) for k in (FORWARD, REVERSE, ABSENT)], axis=1)
    return PosteriorTable(g, probs.reshape(g.m, 3))


def exact_posterior(data: DataMatrix, g: CandidateGraph, prior: Prior,
                    constraints: Sequence[EdgeConstraint] | None = None) -> PosteriorTable:
    """Edge-state marginals of prior x plug-in likelihood over every acyclic vector."""
    if g.m > MAX_EXACT_EDGES:
        raise GuardExceeded(f"{g.m} edges; exact posterior is limited to {MAX_EXACT_EDGES}")
    allowed = effective_allowed(prior, g.m, constraints)
    cache = ScoreCache(data)
    states, weights = [], []
    for s in itertools.product(*allowed):
        ps = parent_sets(g, s)
        if not is_acyclic(g, s):
            continue
        lw = sum(math.log(prior[k]) for k in s)
        lw += sum(cache.node(k, p) for k, p in enumerate(ps))
        states.append(s)
        weights.append(lw)
    w = np.array(weights)
    w = np.exp(w - logsumexp(w))
    S = np.array(states, dtype=np.int8).reshape(len(states), g.m)
    probs = np.zeros((g.m, 3))
    for k in (FORWARD, REVERSE, ABSENT):
        probs[:, k] = ((S == k) * w[:, None]).sum(axis=0)
    return PosteriorTable(g, probs)


# --- repair paths -------------------------------------------------------------

@dataclass(frozen=True)
class RepairPath:
    proposed: tuple[int, ...]                 # edges changed by the proposal
    repairs: tuple[tuple[int, int], ...]      # (edge, length of the cycle it broke)
    coefficient: Fraction                     # product of 1/c over every change
    probability: float                        # product of per-edge switch probabilities
    m: int = 0

    @property
    def c_vector(self) -> tuple[int, ...]:
        """Denominators of the coefficient: m per proposed edge, cycle length per repair."""
        return (self.m,) * len(self.proposed) + tuple(c for _, c in self.repairs)


def enumerate_repair_paths(start: Sequence[int], end: Sequence[int], g: CandidateGraph,
                           catalog: CycleCatalog | None = None,
                           prior: Prior = Prior(0.05, 0.05, 0.9)) -> list[RepairPath]:
    """Every way the proposal + cycle-repair move can turn ``start`` into ``end``.

    A path changes a nonempty subset of the differing edges straight to
    their final state (each chosen with weight 1/m), then repairs cycles
    round by round in catalog order, one differing edge per cycle (weight
    1/cycle length).  Each differing edge changes exactly once and the
    path must finish acyclic at ``end``.
    """
    if g.m > MAX_PATH_EDGES:
        raise GuardExceeded(f"{g.m} edges; path enumeration is limited to {MAX_PATH_EDGES}")
    catalog = catalog if catalog is not None else build_cycle_catalog(g)
    start, end = tuple(start), tuple(end)
    diff = [i for i in range(g.m) if start[i] != end[i]]
    if not diff:
        return [RepairPath((), (), Fraction(1), 1.0, g.m)]
    m = g.m
    paths: list[RepairPath] = []

    def switch(e):
        return prior.switch_prob(start[e], end[e])

    def finish(state, changed, proposed, repairs):
        found = detect_cycles(state, catalog)
        if not found:
            if tuple(state) == end:
                coef = Fraction(1, m) ** len(proposed)
                for _, c in repairs:
                    coef *= Fraction(1, c)
                prob = math.prod(switch(e) for e in diff)
                paths.append(RepairPath(tuple(proposed), tuple(repairs), coef, prob, m))
            return
        repair_round(state, changed, proposed, repairs, found)

    def repair_round(state, changed, proposed, repairs, pending):
        if not pending:
            finish(state, changed, proposed, repairs)
            return
        cyc, rest = pending[0], pending[1:]
        if not all(state[e] == st for e, st in zip(cyc.edges, cyc.states)):
            repair_round(state, changed, proposed, repairs, rest)
            return
        for e in sorted(cyc.edges):
            if e in changed or start[e] == end[e]:
                continue
            nxt = list(state)
            nxt[e] = end[e]
            repair_round(nxt, changed | {e}, proposed, repairs + [(e, cyc.length)], rest)

    for size in range(1, len(diff) + 1):
        for subset in itertools.combinations(diff, size):
            state = list(start)
            for e in subset:
                state[e] = end[e]
            finish(state, frozenset(subset), list(subset), [])
    return paths


def coefficient_sum(paths: Sequence[RepairPath]) -> Fraction:
    return sum((p.coefficient for p in paths), Fraction(0))
