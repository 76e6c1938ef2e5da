"""Error metrics between expected and posterior edge-state probabilities."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .sampler import PosteriorTable


class MetricError(ValueError):
    pass


def _row(r) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3,) or np.any(r < -1e-12) or abs(r.sum() - 1.0) > 1e-6:
        raise MetricError(f"malformed probability row {r.tolist()}")
    return r


def emse(expected, posterior) -> float:
    """Mean squared difference over the three states of one edge."""
    d = _row(expected) - _row(posterior)
    return float(d @ d) / 3.0


def _same_edges(a: PosteriorTable, b: PosteriorTable):
    if a.graph.edges != b.graph.edges or a.graph.b != b.graph.b:
        raise MetricError("expected and posterior tables cover different edges")


def emse_table(expected: PosteriorTable, posterior: PosteriorTable) -> list[float]:
    _same_edges(expected, posterior)
    return [emse(expected.probs[i], posterior.probs[i]) for i in range(expected.graph.m)]


def mse1(expected: PosteriorTable, posterior: PosteriorTable) -> float:
    vals = emse_table(expected, posterior)
    if not vals:
        raise MetricError("no edges")
    return float(np.mean(vals))


def mse2(expected: PosteriorTable, posterior: PosteriorTable) -> float:
    """Squared error of both directed entries, averaged over 2 x (true edge count).

    True edges are rows whose expected presence probability is positive;
    the posterior's forward/reverse probabilities stand in for the two
    directed adjacency entries.
    """
    _same_edges(expected, posterior)
    E, P = expected.probs, posterior.probs
    true = np.nonzero(E[:, 0] + E[:, 1] > 0)[0]
    if len(true) == 0:
        raise MetricError("expected table has no present edges")
    d = E[true, :2] - P[true, :2]
    return float((d ** 2).sum()) / (2 * len(true))


def directed_matrix(table: PosteriorTable, b: int | None = None) -> np.ndarray:
    """b x b matrix of Pr(A_jk = 1); pairs outside the candidate graph are 0."""
    b = table.graph.b if b is None else b
    M = np.zeros((b, b))
    for (u, v), (p0, p1, _) in zip(table.graph.edges, table.probs):
        M[u, v] = p0
        M[v, u] = p1
    return M


def mse3(expected: PosteriorTable, posterior: PosteriorTable, b: int | None = None) -> float:
    b = expected.graph.b if b is None else b
    if b < 2:
        raise MetricError("need at least two nodes")
    d = directed_matrix(expected, b) - directed_matrix(posterior, b)
    return float((d ** 2).sum()) / (b * b - b)


def precision_power(posterior: PosteriorTable, true_pairs: Sequence[tuple[int, int]],
                    cutoff: float = 0.5) -> tuple[float, float]:
    """Edges with P0 + P1 > cutoff count as inferred; empty inference has precision 1."""
    if not 0.0 < cutoff < 1.0:
        raise MetricError("cutoff must lie in (0, 1)")
    true = {tuple(sorted(p)) for p in true_pairs}
    presence = posterior.probs[:, 0] + posterior.probs[:, 1]
    inferred = {e for e, p in zip(posterior.graph.edges, presence) if p > cutoff}
    hits = len(inferred & true)
    precision = hits / len(inferred) if inferred else 1.0
    power = hits / len(true) if true else float("nan")
    return precision, power


def total_variation(a: PosteriorTable, b: PosteriorTable) -> np.ndarray:
    """Per-edge total-variation distance, 0.5 * sum_k |a_k - b_k|."""
    _same_edges(a, b)
    return 0.5 * np.abs(a.probs - b.probs).sum(axis=1)
