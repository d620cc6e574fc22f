"""Fixed-length random walks ("tours") over a :class:`~entropywalk.graph.Graph`.

Tours are generated in fixed-size blocks. Block ``b`` draws all of its
randomness from ``SeedSequence(master_seed, spawn_key=(b,))``, so the tour
multiset depends only on the graph and :class:`WalkParams`, never on how many
worker threads produced the blocks or in which order they finished.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .entropy import entropy_ratios
from .errors import ConfigurationError, DomainError
from .graph import Graph

__all__ = [
    "WalkParams",
    "Tour",
    "RunStats",
    "TourBlock",
    "random_tour",
    "tour_blocks",
    "run_tours",
    "personalized_tours",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 2048
# rounds of regeneration with zero completed tours before giving up
MAX_STALLED_ROUNDS = 64


@dataclass(frozen=True)
class WalkParams:
    """Walk configuration.

    ``lt`` counts visited nodes, so a tour makes ``lt - 1`` hops.
    """

    nt: int
    lt: int
    minm: int
    maxm: int
    et: float
    start: int | None = None
    master_seed: int = 0

    def __post_init__(self):
        if self.nt < 0:
            raise ConfigurationError(f"number of tours must be >= 0, got {self.nt}")
        if self.lt < 2:
            raise ConfigurationError(f"tour length must be >= 2 visits, got {self.lt}")
        if not 1 <= self.minm <= self.maxm <= self.lt:
            raise ConfigurationError(
                f"need 1 <= min members <= max members <= tour length, "
                f"got {self.minm}, {self.maxm}, {self.lt}"
            )
        if not 0 < self.et <= 1:
            raise ConfigurationError(f"entropy threshold must be in (0, 1], got {self.et}")
        if self.master_seed < 0:
            raise ConfigurationError(f"master seed must be non-negative, got {self.master_seed}")


@dataclass
class Tour:
    visits: tuple[int, ...]
    freq: dict[int, int]
    start: int
    complete: bool

    @classmethod
    def from_visits(cls, visits, lt: int | None = None) -> Tour:
        visits = tuple(visits)
        complete = lt is None or len(visits) == lt
        return cls(visits=visits, freq=dict(Counter(visits)), start=visits[0], complete=complete)

    def __len__(self) -> int:
        return len(self.visits)

    @property
    def distinct(self) -> int:
        return len(self.freq)


@dataclass
class RunStats:
    generated: int = 0
    accepted: int = 0
    rejected: int = 0
    # walks started, including dead-end walks that were regenerated
    attempts: int = 0
    seconds: float = 0.0
    extra: dict[str, int] = field(default_factory=dict)

    @property
    def accepted_fraction(self) -> float:
        return self.accepted / self.generated if self.generated else 0.0

    def summary(self) -> str:
        parts = [
            f"generated={self.generated}",
            f"accepted={self.accepted}",
            f"rejected={self.rejected}",
            f"attempts={self.attempts}",
        ]
        parts += [f"{k}={v}" for k, v in self.extra.items()]
        rate = self.generated / self.seconds if self.seconds > 0 else float("inf")
        parts += [f"seconds={self.seconds:.3f}", f"tours_per_second={rate:.0f}"]
        return " ".join(parts)


@dataclass
class TourBlock:
    index: int
    visits: np.ndarray  # (count, lt) int64
    ratios: np.ndarray  # entropy ratio per row
    attempts: int


def random_tour(g: Graph, start: int, lt: int, rng: np.random.Generator) -> Tour:
    """One walk of up to ``lt`` visits from ``start``, stepping to uniform neighbors.

    The tour stops early at a node without out-neighbors and is then marked
    incomplete.

    Raises:
        ConfigurationError: ``start`` has no neighbors.
    """
    adj = g._adj
    g._check(start)
    if not adj[start]:
        raise ConfigurationError(f"start node {g.label(start)!r} has degree 0")
    visits = [start]
    cur = start
    while len(visits) < lt:
        nbrs = adj[cur]
        if not nbrs:
            break
        cur = nbrs[int(rng.integers(len(nbrs)))]
        visits.append(cur)
    return Tour.from_visits(visits, lt)


def _walk_batch(indptr, indices, starts, lt, rng):
    n = len(starts)
    out = np.empty((n, lt), dtype=np.int64)
    out[:, 0] = starts
    ok = np.ones(n, dtype=bool)
    cur = starts
    for j in range(1, lt):
        lo = indptr[cur]
        deg = indptr[cur + 1] - lo
        live = deg > 0
        ok &= live
        step = rng.integers(0, np.maximum(deg, 1))
        # dead rows keep their node; their gather index is clamped in range
        cur = np.where(live, indices[np.where(live, lo + step, 0)], cur)
        out[:, j] = cur
    return out, ok


def _start_pool(g: Graph) -> np.ndarray:
    return np.flatnonzero(g.degrees() > 0)


def _make_block(indptr, indices, pool, fixed_start, lt, count, seed, index) -> TourBlock:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    out = np.empty((count, lt), dtype=np.int64)
    filled = attempts = stalled = 0
    while filled < count:
        need = count - filled
        if fixed_start is None:
            starts = pool[rng.integers(0, len(pool), size=need)]
        else:
            starts = np.full(need, fixed_start, dtype=np.int64)
        walks, ok = _walk_batch(indptr, indices, starts, lt, rng)
        attempts += need
        good = walks[ok]
        out[filled : filled + len(good)] = good
        filled += len(good)
        stalled = 0 if len(good) else stalled + 1
        if stalled >= MAX_STALLED_ROUNDS:
            raise ConfigurationError(f"no complete tour of {lt} visits could be generated")
    return TourBlock(index=index, visits=out, ratios=entropy_ratios(out), attempts=attempts)


def tour_blocks(g: Graph, p: WalkParams, threads: int = 1, block_size: int = BLOCK_SIZE) -> Iterator[TourBlock]:
    """Generate ``p.nt`` complete tours as blocks, yielded in block order.

    Raises:
        ConfigurationError: the graph has no node with a neighbor, or the
            fixed start node has none.
    """
    if p.nt == 0:
        return
    pool = _start_pool(g)
    if p.start is not None:
        if not 0 <= p.start < g.node_count:
            raise DomainError(f"start node id {p.start} out of range")
        if g.degree(p.start) == 0:
            raise ConfigurationError(f"start node {g.label(p.start)!r} has degree 0")
    elif len(pool) == 0:
        raise ConfigurationError("graph has no node with degree >= 1")
    indptr, indices = g.csr()
    sizes = [block_size] * (p.nt // block_size)
    if p.nt % block_size:
        sizes.append(p.nt % block_size)

    def build(i: int) -> TourBlock:
        return _make_block(indptr, indices, pool, p.start, p.lt, sizes[i], p.master_seed, i)

    if threads <= 1:
        for i in range(len(sizes)):
            yield build(i)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool_exec:
        # map preserves submission order
        yield from pool_exec.map(build, range(len(sizes)))


def run_tours(
    g: Graph,
    p: WalkParams,
    accept: Callable[[Tour], bool] | None = None,
    sink: Callable[[Tour], None] | None = None,
    threads: int = 1,
    block_size: int = BLOCK_SIZE,
) -> RunStats:
    """Generate ``p.nt`` complete tours and pass the accepted ones to ``sink``.

    With ``accept=None`` a tour is accepted when its entropy ratio is at most
    ``p.et``. Tours reach ``sink`` one at a time, in tour-index order, from the
    calling thread.
    """
    stats = RunStats()
    t0 = time.perf_counter()
    for block in tour_blocks(g, p, threads=threads, block_size=block_size):
        stats.generated += len(block.visits)
        stats.attempts += block.attempts
        if accept is None:
            mask = block.ratios <= p.et
            rows = block.visits[mask]
            stats.accepted += len(rows)
            if sink is not None:
                for row in rows.tolist():
                    sink(Tour.from_visits(row))
        else:
            for row in block.visits.tolist():
                tour = Tour.from_visits(row)
                if accept(tour):
                    stats.accepted += 1
                    if sink is not None:
                        sink(tour)
    stats.rejected = stats.generated - stats.accepted
    stats.seconds = time.perf_counter() - t0
    return stats


def personalized_tours(
    g: Graph,
    p: WalkParams,
    accept: Callable[[Tour], bool] | None = None,
    sink: Callable[[Tour], None] | None = None,
    threads: int = 1,
) -> RunStats:
    """:func:`run_tours` with every tour starting at ``p.start``."""
    if p.start is None:
        raise ConfigurationError("personalized tours need a start node")
    return run_tours(g, p, accept=accept, sink=sink, threads=threads)
