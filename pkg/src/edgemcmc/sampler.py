"""Metropolis-Hastings over edge-state vectors.

Each iteration picks ``n ~ Binomial(m, 1/m)`` edges (redrawn until
``n >= 1``), moves each to one of its other states with probability
proportional to the prior, breaks any directed cycle this creates, and
accepts with

    log alpha = min(0, log prior ratio + log likelihood ratio + log transition ratio)

where the transition ratio only involves the edges whose state differs
between the current and the proposed vector.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cycles import CycleCatalog, build_cycle_catalog, detect_cycles, remove_cycles
from .graph import (STATES, CandidateGraph, EdgeConstraint, GraphError, Prior, allowed_states,
                    is_acyclic)
from .rng import Stream
from .score import DataMatrix, ScoreCache

log = logging.getLogger(__name__)


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 30_000
    burn_in: float = 0.2
    step_size: int = 120
    seed: int = 0
    debug: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0.0 <= self.burn_in < 1.0:
            raise ValueError("burn-in fraction must be in [0, 1)")
        if self.step_size < 1:
            raise ValueError("step size must be positive")
        if self.retained < 1:
            raise ValueError("configuration retains no samples")

    @property
    def burn(self) -> int:
        return int(math.floor(self.burn_in * self.iterations))

    @property
    def retained(self) -> int:
        return (self.iterations - self.burn) // self.step_size

    def is_recorded(self, t: int) -> bool:
        return t > self.burn and (t - self.burn) % self.step_size == 0


@dataclass
class ChainState:
    s: tuple[int, ...]
    loglik: float
    node_ll: list[float] = field(repr=False)


@dataclass
class Trace:
    iterations: np.ndarray
    states: np.ndarray
    logliks: np.ndarray
    accepted: int = 0
    total: int = 0

    def __len__(self) -> int:
        return len(self.iterations)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.total if self.total else float("nan")


@dataclass
class PosteriorTable:
    graph: CandidateGraph
    probs: np.ndarray  # shape (m, 3)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64).reshape(self.graph.m, 3)

    def row(self, i: int) -> tuple[float, float, float]:
        return tuple(self.probs[i].tolist())


def effective_allowed(prior: Prior, m: int, constraints: Sequence[EdgeConstraint] | None = None):
    """Allowed states per edge after dropping zero-prior states."""
    allowed = allowed_states(m, constraints)
    for c in constraints or ():
        for k in allowed[c.edge]:
            if prior[k] <= 0 and len(allowed[c.edge]) > 1:
                raise GraphError(f"edge {c.edge + 1}: constraint allows state {k} "
                                 "which has zero prior probability")
    out = []
    for i, a in enumerate(allowed):
        pos = tuple(k for k in a if prior[k] > 0)
        if not pos:
            raise GraphError(f"edge {i + 1}: no allowed state has positive prior probability")
        out.append(pos)
    return out


def log_transition_ratio(diff, prior: Prior, allowed=None) -> float:
    """log Pr(proposed -> current) - log Pr(current -> proposed) over changed edges.

    ``diff`` holds ``(edge, old, new)`` triples; ``allowed`` defaults to all
    three states for every edge.
    """
    total = 0.0
    for e, old, new in diff:
        al = STATES if allowed is None else allowed[e]
        fwd = prior.switch_prob(old, new, al)
        bwd = prior.switch_prob(new, old, al)
        if fwd <= 0 or bwd <= 0:
            raise SamplerError(f"edge {e + 1}: move {old}->{new} has zero probability")
        total += math.log(bwd) - math.log(fwd)
    return total


def log_prior_ratio(diff, prior: Prior) -> float:
    return sum(math.log(prior[new]) - math.log(prior[old]) for _, old, new in diff)


def state_diff(current: Sequence[int], proposed: Sequence[int]) -> list[tuple[int, int, int]]:
    return [(i, a, b) for i, (a, b) in enumerate(zip(current, proposed)) if a != b]


def log_acceptance(current: ChainState, proposed: ChainState, diff, prior: Prior,
                   allowed=None) -> float:
    if not diff:
        return 0.0
    val = (log_prior_ratio(diff, prior) + proposed.loglik - current.loglik
           + log_transition_ratio(diff, prior, allowed))
    return min(0.0, val)


class Chain:
    """One Metropolis-Hastings chain; holds the per-chain score cache."""

    def __init__(self, data: DataMatrix, g: CandidateGraph, prior: Prior,
                 constraints: Sequence[EdgeConstraint] | None = None,
                 catalog: CycleCatalog | None = None, rng: Stream | None = None,
                 cache: ScoreCache | None = None):
        if data.b != g.b:
            raise ValueError(f"data has {data.b} columns but the graph has {g.b} nodes")
        self.data, self.graph, self.prior = data, g, prior
        self.allowed = effective_allowed(prior, g.m, constraints)
        self.catalog = catalog if catalog is not None else build_cycle_catalog(g)
        self.rng = rng if rng is not None else Stream(0)
        self.cache = cache if cache is not None else ScoreCache(data)
        self.pool = [i for i, a in enumerate(self.allowed) if len(a) > 1]
        self._count_cdf = _truncated_binomial_cdf(len(self.pool))
        # node k's parent through edge e: (e, other node, state giving other -> k)
        self._incident: list[list[tuple[int, int, int]]] = [[] for _ in range(g.b)]
        for e, (u, v) in enumerate(g.edges):
            self._incident[v].append((e, u, 0))
            self._incident[u].append((e, v, 1))
        self._switch = {}
        for a in set(self.allowed):
            for old in a:
                targets = [k for k in a if k != old]
                w = [prior[k] for k in targets]
                tot = sum(w)
                cdf, acc = [], 0.0
                for x in w:
                    acc += x / tot
                    cdf.append(acc)
                self._switch[(a, old)] = (targets, cdf)

    def parents(self, s: Sequence[int], k: int) -> tuple[int, ...]:
        return tuple(sorted(o for e, o, st in self._incident[k] if s[e] == st))

    def score(self, s: Sequence[int]) -> ChainState:
        node_ll = [self.cache.node(k, self.parents(s, k)) for k in range(self.graph.b)]
        return ChainState(tuple(s), math.fsum(node_ll), node_ll)

    def rescore(self, current: ChainState, s: Sequence[int], diff) -> ChainState:
        """Score ``s`` reusing ``current`` for nodes whose parents did not change."""
        node_ll = list(current.node_ll)
        touched = set()
        for e, _, _ in diff:
            touched.update(self.graph.edges[e])
        for k in touched:
            node_ll[k] = self.cache.node(k, self.parents(s, k))
        return ChainState(tuple(s), math.fsum(node_ll), node_ll)

    def init_state(self) -> ChainState:
        s = []
        for a in self.allowed:
            w = [self.prior[k] for k in a]
            s.append(a[self.rng.weighted(w)] if len(a) > 1 else a[0])
        s = remove_cycles(s, self.catalog, self.prior, self.allowed, self.rng)
        return self.score(s)

    def propose(self, current: ChainState) -> tuple[list[int], list[tuple[int, int, int]]]:
        if not self.pool:
            return list(current.s), []
        rng = self.rng
        n = rng.from_cdf(self._count_cdf) + 1
        if n == 1:
            picked = [self.pool[rng.index(len(self.pool))]]
        else:
            picked = [self.pool[i] for i in rng.sample(len(self.pool), n)]
        s = list(current.s)
        for e in picked:
            targets, cdf = self._switch[(self.allowed[e], s[e])]
            s[e] = targets[rng.from_cdf(cdf)] if len(targets) > 1 else targets[0]
        s = remove_cycles(s, self.catalog, self.prior, self.allowed, rng, edges=picked)
        return s, state_diff(current.s, s)

    def step(self, current: ChainState) -> tuple[ChainState, bool]:
        s, diff = self.propose(current)
        log_u = self.rng.log_uniform()
        if not diff:
            return current, True
        proposed = self.rescore(current, s, diff)
        la = log_acceptance(current, proposed, diff, self.prior, self.allowed)
        if log_u < la:
            return proposed, True
        return current, False


def _truncated_binomial_cdf(m: int) -> list[float]:
    """CDF of Binomial(m, 1/m) conditioned on at least one success, indexed from n=1."""
    if m == 0:
        return [1.0]
    p = 1.0 / m
    pmf = [math.comb(m, k) * p ** k * (1 - p) ** (m - k) for k in range(1, m + 1)]
    tot = sum(pmf)
    cdf, acc = [], 0.0
    for x in pmf:
        acc += x / tot
        cdf.append(acc)
    cdf[-1] = 1.0
    return cdf


def init_state(data, g, prior, constraints=None, catalog=None, rng=None) -> ChainState:
    return Chain(data, g, prior, constraints, catalog, rng).init_state()


def run(data: DataMatrix, g: CandidateGraph, prior: Prior, config: McmcConfig,
        constraints: Sequence[EdgeConstraint] | None = None,
        catalog: CycleCatalog | None = None, rng: Stream | None = None) -> Trace:
    """Run one chain and return the thinned trace after burn-in."""
    chain = Chain(data, g, prior, constraints, catalog,
                  rng if rng is not None else Stream(config.seed))
    state = chain.init_state()
    keep_t, keep_s, keep_ll = [], [], []
    accepted = 0
    for t in range(1, config.iterations + 1):
        state, acc = chain.step(state)
        accepted += acc
        if config.debug:
            _check_state(chain, state, t)
        if config.is_recorded(t):
            keep_t.append(t)
            keep_s.append(state.s)
            keep_ll.append(state.loglik)
    states = np.array(keep_s, dtype=np.int8).reshape(len(keep_t), g.m)
    log.debug("chain done: %d/%d accepted, %d cached node fits",
              accepted, config.iterations, len(chain.cache))
    return Trace(np.array(keep_t, dtype=np.int64), states, np.array(keep_ll), accepted,
                 config.iterations)


def _check_state(chain: Chain, state: ChainState, t: int):
    if detect_cycles(state.s, chain.catalog) or not is_acyclic(chain.graph, state.s):
        raise SamplerError(f"iteration {t}: chain state {state.s} has a directed cycle")


def check_trace_acyclic(trace: Trace, g: CandidateGraph, catalog: CycleCatalog | None = None) -> bool:
    catalog = catalog if catalog is not None else build_cycle_catalog(g)
    for row in trace.states:
        s = row.tolist()
        if detect_cycles(s, catalog) or not is_acyclic(g, s):
            return False
    return True


def posterior_from_trace(trace: Trace, g: CandidateGraph) -> PosteriorTable:
    if len(trace) == 0:
        raise SamplerError("trace has no retained samples")
    S = np.asarray(trace.states)
    probs = np.stack([(S == k).mean(axis=0) for k in STATES], axis=1) if g.m else np.zeros((0, 3))
    return PosteriorTable(g, probs)


def infer(data: DataMatrix, g: CandidateGraph, prior: Prior, config: McmcConfig,
          constraints=None) -> tuple[PosteriorTable, Trace]:
    trace = run(data, g, prior, config, constraints)
    return posterior_from_trace(trace, g), trace
