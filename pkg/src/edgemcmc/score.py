"""Linear-Gaussian log-likelihood with plug-in maximum-likelihood parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import CandidateGraph, parent_sets

LOG_2PI = math.log(2.0 * math.pi)
MIN_SIGMA2 = 1e-12


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.values, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("data must be a 2-d array")
        if X.shape[0] < 2:
            raise ValueError("need at least two observations")
        if not np.all(np.isfinite(X)):
            raise ValueError("data contains missing or non-finite values")
        if len(self.names) != X.shape[1]:
            raise ValueError("need one column name per node")
        var = X.var(axis=0)
        bad = [self.names[j] for j in np.nonzero(var <= 0)[0]]
        if bad:
            raise ValueError(f"columns with zero variance: {', '.join(bad)}")
        X.setflags(write=False)
        object.__setattr__(self, "values", X)
        object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def from_array(cls, X, names=None) -> "DataMatrix":
        X = np.asarray(X, dtype=np.float64)
        if names is None:
            names = [f"T{j + 1}" for j in range(X.shape[1])]
        return cls(X, tuple(names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def b(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class NodeFit:
    node: int
    parents: tuple[int, ...]
    coefficients: np.ndarray
    sigma2: float
    loglik: float


def node_log_likelihood(data: DataMatrix, node: int, parents: Sequence[int]) -> NodeFit:
    """Least-squares fit of ``node`` on an intercept and its parents."""
    parents = tuple(parents)
    if node in parents or len(set(parents)) != len(parents):
        raise ValueError("parents must be distinct and exclude the node")
    X = data.values
    n = data.n
    if len(parents) + 1 >= n:
        raise DegenerateFit(f"node {node + 1}: {len(parents)} parents with only {n} observations")
    y = X[:, node]
    design = np.empty((n, len(parents) + 1))
    design[:, 0] = 1.0
    if parents:
        design[:, 1:] = X[:, parents]
    Q, R = np.linalg.qr(design)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise DegenerateFit(f"node {node + 1}: collinear parents {[p + 1 for p in parents]}")
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - design @ coef
    sigma2 = float(resid @ resid) / n
    if sigma2 < MIN_SIGMA2:
        raise DegenerateFit(f"node {node + 1} is perfectly predicted by {[p + 1 for p in parents]}")
    loglik = -0.5 * n * (LOG_2PI + math.log(sigma2) + 1.0)
    return NodeFit(node, parents, coef, sigma2, loglik)


class ScoreCache:
    """Node log-likelihoods keyed by (node, sorted parent tuple)."""

    def __init__(self, data: DataMatrix):
        self.data = data
        self._store: dict[tuple[int, tuple[int, ...]], float] = {}

    def node(self, node: int, parents: Sequence[int]) -> float:
        key = (node, tuple(sorted(parents)))
        val = self._store.get(key)
        if val is None:
            val = node_log_likelihood(self.data, node, key[1]).loglik
            self._store[key] = val
        return val

    def __len__(self) -> int:
        return len(self._store)


def graph_log_likelihood(data: DataMatrix, g: CandidateGraph, s: Sequence[int],
                         cache: ScoreCache | None = None) -> float:
    """Sum of node log-likelihoods for the DAG given by ``s`` (acyclicity not checked)."""
    if data.b != g.b:
        raise ValueError(f"data has {data.b} columns, graph has {g.b} nodes")
    total = 0.0
    for k, ps in enumerate(parent_sets(g, s)):
        if cache is not None:
            total += cache.node(k, ps)
        else:
            total += node_log_likelihood(data, k, ps).loglik
    return total
