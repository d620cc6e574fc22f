"""Walk-visit centrality, eigenvector centrality, and their difference.

Counting how often tours visit each node gives a Monte Carlo centrality; at
``et = 1`` it converges to the stationary law ``deg(v) / 2|E|`` of the simple
random walk. Counting only entropy-accepted tours shifts mass toward nodes
central to small dense groups, which shows up as positive peaks when the walk
score is compared against eigenvector centrality.
"""

from __future__ import annotations

import math

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .graph import Graph
from .walker import Tour, WalkParams, tour_blocks

logger = logging.getLogger(__name__)

__all__ = [
    "CentralityTable",
    "EigenvectorResult",
    "DeltaReport",
    "eigenvector_centrality",
    "centrality_delta",
    "largest_component",
    "walk_centrality",
]


class CentralityTable:
    """Per-node visit counters."""

    def __init__(self, node_count: int):
        self.counts = np.zeros(node_count, dtype=np.int64)
        self.total = 0

    def accumulate(self, t: Tour) -> None:
        for v, c in t.freq.items():
            self.counts[v] += c
        self.total += len(t.visits)

    def accumulate_visits(self, visits: np.ndarray) -> None:
        """Add every visit in an array of tours at once."""
        self.counts += np.bincount(visits.ravel(), minlength=len(self.counts))
        self.total += visits.size

    def scores(self) -> np.ndarray:
        if self.total == 0:
            return np.zeros(len(self.counts))
        return self.counts / self.total


def walk_centrality(g: Graph, p: WalkParams, threads: int = 1) -> CentralityTable:
    """Visit counts over the tours whose entropy ratio is at most ``p.et``."""
    table = CentralityTable(g.node_count)
    for block in tour_blocks(g, p, threads=threads):
        table.accumulate_visits(block.visits[block.ratios <= p.et])
    return table


@dataclass
class EigenvectorResult:
    scores: np.ndarray  # L2-normalized; zero outside the component used
    iterations: int
    residual: float
    whole_graph: bool  # False when restricted to the largest component


def largest_component(g: Graph) -> np.ndarray:
    """Node ids of the largest connected component (ties: lowest first node)."""
    seen = np.zeros(g.node_count, dtype=bool)
    best: list[int] = []
    adj = g._adj
    for s in range(g.node_count):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        if len(comp) > len(best):
            best = comp
    return np.array(sorted(best), dtype=np.int64)


def eigenvector_centrality(g: Graph, tol: float = 1e-10, max_iter: int = 10_000) -> EigenvectorResult:
    """Dominant adjacency eigenvector by power iteration, L2-normalized.

    Iterates on ``A + I``, which has the same dominant eigenvector as ``A``
    but does not oscillate on bipartite graphs. Stops when successive unit
    iterates are closer than ``tol`` in L2. A disconnected graph is handled on
    its largest component, with every other node scored 0.

    Raises:
        ConvergenceError: ``max_iter`` reached first.
    """
    n = g.node_count
    scores = np.zeros(n)
    if n == 0:
        return EigenvectorResult(scores, 0, 0.0, True)
    comp = largest_component(g)
    whole = len(comp) == n
    if not whole:
        logger.warning("graph is disconnected; eigenvector centrality on %d of %d nodes", len(comp), n)
    indptr, indices = g.csr()
    pos = np.full(n, -1, dtype=np.int64)
    pos[comp] = np.arange(len(comp))
    src = np.repeat(np.arange(n), np.diff(indptr))
    keep = pos[src] >= 0
    rows, cols = pos[src[keep]], pos[indices[keep]]
    x = np.full(len(comp), 1.0 / np.sqrt(len(comp)))
    residual = np.inf
    for it in range(1, max_iter + 1):
        y = x + np.bincount(rows, weights=x[cols], minlength=len(comp))
        y /= math.sqrt(y @ y)
        d = y - x
        residual = math.sqrt(d @ d)
        x = y
        if residual < tol:
            scores[comp] = x
            return EigenvectorResult(scores, it, residual, whole)
    raise ConvergenceError("eigenvector centrality did not converge", residual, max_iter)


@dataclass
class DeltaReport:
    delta: np.ndarray
    peaks: list[int]
    cut: float


def _simplex(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    s = x.sum()
    return x / s if s > 0 else x


def centrality_delta(filtered, reference, peak_sigma: float = 2.0) -> DeltaReport:
    """Per-node ``filtered - reference`` after putting both on the simplex.

    ``filtered`` may be a :class:`CentralityTable` or any score vector. Peaks
    are nodes whose delta exceeds ``mean + peak_sigma * std`` of all deltas.

    Raises:
        DomainError: the two score vectors cover different node counts.
    """
    if isinstance(filtered, CentralityTable):
        filtered = filtered.scores()
    f, r = _simplex(filtered), _simplex(reference)
    if f.shape != r.shape:
        raise DomainError(f"score vectors cover {f.shape[0]} and {r.shape[0]} nodes")
    delta = f - r
    if delta.size == 0:
        return DeltaReport(delta, [], 0.0)
    cut = float(delta.mean() + peak_sigma * delta.std())
    peaks = [int(v) for v in np.flatnonzero(delta > cut)]
    return DeltaReport(delta, peaks, cut)
