"""Readers and writers for data, graphs, constraints, posteriors and traces.

Floats are written with 17 significant digits so every file round-trips
exactly.  Node indices in text files are 1-based.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .graph import (CandidateGraph, EdgeConstraint, GraphError, candidate_from_adjacency,
                    forbid_parent)
from .sampler import PosteriorTable, Trace
from .score import DataMatrix
from .topologies import Topology

POSTERIOR_HEADER = ("edge_lo", "edge_hi", "p_forward", "p_reverse", "p_absent")


class FormatError(ValueError):
    """A file could not be parsed; the message names the file and line."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# --- data ----------------------------------------------------------------------

def read_data(path) -> DataMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise FormatError(f"{path}: need a header row and at least one observation")
    names = [c.strip() for c in rows[0]]
    X = []
    for ln, r in enumerate(rows[1:], start=2):
        if len(r) != len(names):
            raise FormatError(f"{path}:{ln}: expected {len(names)} fields, got {len(r)}")
        try:
            X.append([float(v) for v in r])
        except ValueError as exc:
            raise FormatError(f"{path}:{ln}: {exc}") from None
    try:
        return DataMatrix(np.array(X), tuple(names))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_data(data: DataMatrix, out: TextIO):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(data.names)
    for row in data.values:
        w.writerow([fmt(v) for v in row])


# --- graphs ----------------------------------------------------------------------

def _node(tok: str, names: Sequence[str] | None, b: int | None, where: str) -> int:
    if names is not None and tok in names:
        return list(names).index(tok)
    try:
        k = int(tok)
    except ValueError:
        raise FormatError(f"{where}: unknown node {tok!r}") from None
    if k < 1 or (b is not None and k > b):
        raise FormatError(f"{where}: node {k} out of range")
    return k - 1


def _pair_lines(path):
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if line:
                yield ln, line.split()


def read_candidate(path, names: Sequence[str] | None = None, b: int | None = None) -> CandidateGraph:
    """Candidate graph from a ``.csv`` adjacency matrix or a ``.edges`` pair list.

    ``names``/``b`` come from the data file; edge lists may use 1-based
    indices or node names.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise FormatError(f"{path}: empty adjacency file")
        header = [c.strip() for c in rows[0]]
        body = rows[1:]
        if body and len(body[0]) == len(header) + 1:  # row labels present
            body = [r[1:] for r in body]
        try:
            A = np.array([[int(float(v)) for v in r] for r in body])
            return candidate_from_adjacency(A, header)
        except (ValueError, GraphError) as exc:
            raise FormatError(f"{path}: {exc}") from None
    pairs = []
    for ln, toks in _pair_lines(path):
        if len(toks) != 2:
            raise FormatError(f"{path}:{ln}: expected 'u v'")
        pairs.append((_node(toks[0], names, b, f"{path}:{ln}"),
                      _node(toks[1], names, b, f"{path}:{ln}")))
    if b is None:
        b = max((max(p) for p in pairs), default=-1) + 1
    try:
        return CandidateGraph.from_pairs(b, pairs, names)
    except GraphError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_edges(g: CandidateGraph, out: TextIO):
    for u, v in g.edges:
        out.write(f"{u + 1} {v + 1}\n")


def read_dag(path, name: str | None = None) -> Topology:
    """Directed ``parent child`` pairs, 1-based; optional ``nodes N`` line."""
    arcs, b = [], None
    for ln, toks in _pair_lines(path):
        if toks[0].lower() == "nodes" and len(toks) == 2:
            b = int(toks[1])
            continue
        if len(toks) != 2:
            raise FormatError(f"{path}:{ln}: expected 'parent child'")
        try:
            arcs.append((int(toks[0]), int(toks[1])))
        except ValueError:
            raise FormatError(f"{path}:{ln}: node indices must be integers") from None
    if not arcs:
        raise FormatError(f"{path}: no arcs")
    b = b if b is not None else max(max(a) for a in arcs)
    try:
        return Topology(name or Path(path).stem, b, tuple(arcs))
    except GraphError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_constraints(path, g: CandidateGraph) -> list[EdgeConstraint]:
    """Lines ``u v forbid parent``: node u may not be a parent of node v."""
    names = g.names
    out = []
    for ln, toks in _pair_lines(path):
        where = f"{path}:{ln}"
        if len(toks) != 4 or [t.lower() for t in toks[2:]] != ["forbid", "parent"]:
            raise FormatError(f"{where}: expected 'u v forbid parent'")
        u = _node(toks[0], names, g.b, where)
        v = _node(toks[1], names, g.b, where)
        try:
            out.append(forbid_parent(g, u, v))
        except GraphError as exc:
            raise FormatError(f"{where}: {exc}") from None
    return out


# --- posteriors and traces ---------------------------------------------------------

def write_posterior(table: PosteriorTable, out: TextIO):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(POSTERIOR_HEADER)
    for (u, v), p in zip(table.graph.edges, table.probs):
        w.writerow([u + 1, v + 1] + [fmt(x) for x in p])


def posterior_csv(table: PosteriorTable) -> str:
    buf = io.StringIO()
    write_posterior(table, buf)
    return buf.getvalue()


def read_posterior(path, b: int | None = None) -> PosteriorTable:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or tuple(c.strip() for c in rows[0]) != POSTERIOR_HEADER:
        raise FormatError(f"{path}: header must be {','.join(POSTERIOR_HEADER)}")
    pairs, probs = [], []
    for ln, r in enumerate(rows[1:], start=2):
        try:
            u, v = int(r[0]), int(r[1])
            probs.append([float(x) for x in r[2:5]])
        except (ValueError, IndexError):
            raise FormatError(f"{path}:{ln}: malformed row") from None
        pairs.append((u - 1, v - 1))
    b = b if b is not None else max((max(p) for p in pairs), default=-1) + 1
    try:
        g = CandidateGraph.from_pairs(b, pairs)
    except GraphError as exc:
        raise FormatError(f"{path}: {exc}") from None
    order = [pairs.index(e) for e in g.edges]
    return PosteriorTable(g, np.array(probs)[order] if probs else np.zeros((0, 3)))


def write_trace(trace: Trace, out: TextIO):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("iteration", "loglik", "state"))
    for t, ll, s in zip(trace.iterations, trace.logliks, trace.states):
        w.writerow([int(t), fmt(ll), "".join(str(int(x)) for x in s)])
