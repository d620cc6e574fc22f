"""Continuous detection over a mutable graph with a Count-Min Sketch top-n.

Mutations are applied between tour batches, never in the middle of a walk,
so every tour is valid against the graph version it started on. The sketch
counts community keys; a bounded :class:`TopN` keeps the strongest ones.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, TextIO

import numpy as np

from .community import CommunityKey, tour_key
from .errors import ConfigurationError, KeyUnderflowError, MutationError, ParseError
from .graph import Graph
from .walker import Tour, WalkParams, _make_block, _start_pool

logger = logging.getLogger(__name__)

__all__ = [
    "CountMinSketch",
    "TopN",
    "GraphMutation",
    "MutableGraph",
    "parse_mutation",
    "read_mutations",
    "apply_mutation",
    "Budget",
    "Snapshot",
    "stream_loop",
]

_MERSENNE = (1 << 61) - 1


class CountMinSketch:
    """Count-Min Sketch over hashable keys; estimates never undercount.

    Row ``i`` hashes a key's 64-bit digest ``x`` with ``(a_i * x + b_i) mod p
    mod width``, a pairwise-independent family over the prime ``p = 2**61 - 1``.
    """

    def __init__(self, width: int = 2048, depth: int = 5, seed: int = 0):
        if width < 1 or depth < 1:
            raise ConfigurationError(f"sketch needs width and depth >= 1, got {width}x{depth}")
        self.width = width
        self.depth = depth
        self.counters = np.zeros((depth, width), dtype=np.int64)
        rng = np.random.default_rng(seed)
        self.hash_seeds = [
            (int(a), int(b))
            for a, b in zip(rng.integers(1, _MERSENNE, size=depth), rng.integers(0, _MERSENNE, size=depth))
        ]
        self._rows = np.arange(depth)

    @classmethod
    def from_error(cls, epsilon: float, delta: float, seed: int = 0) -> CountMinSketch:
        """Smallest sketch with overestimate <= epsilon*N with probability 1-delta."""
        return cls(math.ceil(math.e / epsilon), math.ceil(math.log(1 / delta)), seed)

    @staticmethod
    def _digest(key) -> int:
        raw = key if isinstance(key, bytes) else repr(key).encode()
        return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "little")

    def _columns(self, key) -> np.ndarray:
        x = self._digest(key)
        return np.array([((a * x + b) % _MERSENNE) % self.width for a, b in self.hash_seeds])

    def update(self, key, inc: int = 1) -> int:
        """Add ``inc`` to ``key`` and return its new estimate."""
        if inc < 1:
            raise ValueError(f"increment must be >= 1, got {inc}")
        cols = self._columns(key)
        self.counters[self._rows, cols] += inc
        return int(self.counters[self._rows, cols].min())

    def estimate(self, key) -> int:
        return int(self.counters[self._rows, self._columns(key)].min())

    def halve(self) -> None:
        self.counters //= 2

    @property
    def total(self) -> int:
        return int(self.counters[0].sum())


def cms_update(s: CountMinSketch, key, inc: int = 1) -> int:
    return s.update(key, inc)


def cms_estimate(s: CountMinSketch, key) -> int:
    return s.estimate(key)


class TopN:
    """At most ``capacity`` keys with their latest sketch estimates."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigurationError(f"top-n capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.entries: dict = {}
        self.evictions = 0

    def offer(self, key, estimate: int) -> bool:
        """Record ``key`` at ``estimate``; returns True if it is (now) tracked."""
        if key in self.entries:
            self.entries[key] = estimate
            return True
        if len(self.entries) < self.capacity:
            self.entries[key] = estimate
            return True
        low_key, low = self.min_entry()
        if estimate > low:
            del self.entries[low_key]
            self.entries[key] = estimate
            self.evictions += 1
            return True
        return False

    def min_entry(self):
        return min(self.entries.items(), key=lambda kv: (kv[1], kv[0]))

    def halve(self) -> None:
        for k in self.entries:
            self.entries[k] //= 2

    def ranked(self) -> list:
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def __len__(self) -> int:
        return len(self.entries)


# -- mutable graph ----------------------------------------------------------


@dataclass(frozen=True)
class GraphMutation:
    kind: str  # "add-edge" | "remove-edge" | "add-node" | "remove-node"
    endpoints: tuple[str, ...]

    _ARITY = {"add-edge": 2, "remove-edge": 2, "add-node": 1, "remove-node": 1}

    def __post_init__(self):
        if self._ARITY.get(self.kind) != len(self.endpoints):
            raise MutationError(f"bad mutation {self.kind} {self.endpoints}")


_OPS = {"+e": "add-edge", "-e": "remove-edge", "+n": "add-node", "-n": "remove-node"}


def parse_mutation(line: str, lineno: int | None = None) -> GraphMutation | None:
    """Parse ``+e a b``, ``-e a b``, ``+n a`` or ``-n a``; blank and ``#`` lines give None."""
    tokens = line.split()
    if not tokens or tokens[0].startswith("#"):
        return None
    kind = _OPS.get(tokens[0])
    if kind is None:
        raise ParseError(f"unknown mutation {tokens[0]!r}", line=lineno)
    try:
        return GraphMutation(kind, tuple(tokens[1:]))
    except MutationError as exc:
        raise ParseError(str(exc), line=lineno) from None


def read_mutations(stream: TextIO | Iterable[str]) -> Iterator[GraphMutation]:
    for lineno, line in enumerate(stream, start=1):
        m = parse_mutation(line, lineno)
        if m is not None:
            yield m


class MutableGraph(Graph):
    """Graph accepting edge and node insertions and deletions.

    A removed node keeps its id and label (so ids stay dense and stable) but
    loses all incident edges; adding it back revives the same id.
    """

    def __init__(self, directed: bool = False):
        super().__init__(directed)
        self.noops = 0

    @classmethod
    def from_graph(cls, g: Graph) -> MutableGraph:
        m = cls(directed=g.directed)
        for lab in g._labels:
            m.intern(lab)
        for u, v in g.edges():
            m._add_edge_ids(u, v)
        return m

    def remove_edge(self, a: str, b: str) -> None:
        u, v = self._lookup(a), self._lookup(b)
        if v not in self._nbr_sets[u]:
            raise MutationError(f"no edge {a} {b}")
        self._drop(u, v)
        if not self.directed:
            self._drop(v, u)
        self.edge_count -= 1
        self._touch()

    def remove_node(self, a: str) -> None:
        u = self._lookup(a)
        for v in list(self._adj[u]):
            self._drop(u, v)
            if not self.directed:
                self._drop(v, u)
            self.edge_count -= 1
        if self.directed:
            for w in range(self.node_count):
                if u in self._nbr_sets[w]:
                    self._drop(w, u)
                    self.edge_count -= 1
        self._touch()

    def _drop(self, u: int, v: int) -> None:
        self._adj[u].remove(v)
        self._nbr_sets[u].discard(v)

    def _lookup(self, label: str) -> int:
        v = self._index.get(label)
        if v is None:
            raise MutationError(f"unknown node label {label!r}")
        return v


def apply_mutation(g: MutableGraph, m: GraphMutation) -> bool:
    """Apply ``m`` to ``g``. Returns False (and counts a no-op) for redundant adds.

    Raises:
        MutationError: removal of an unknown label or a missing edge.
    """
    if m.kind == "add-edge":
        a, b = m.endpoints
        if a == b:
            raise MutationError(f"self-loop {a} {b}")
        changed = g.add_edge(a, b)
    elif m.kind == "add-node":
        changed = m.endpoints[0] not in g
        g.intern(m.endpoints[0])
    elif m.kind == "remove-edge":
        g.remove_edge(*m.endpoints)
        changed = True
    else:
        g.remove_node(m.endpoints[0])
        changed = True
    if not changed:
        g.noops += 1
    return changed


# -- loop ---------------------------------------------------------------------


@dataclass
class Budget:
    """Stop condition; ``None`` fields are unlimited."""

    tours: int | None = None
    seconds: float | None = None


@dataclass
class Snapshot:
    tours: int
    entries: list[tuple[CommunityKey, int]]
    graph_version: int
    mutations: int = 0
    mutation_errors: int = 0

    def to_json(self, g: Graph) -> str:
        top = [{"members": [g.label(v) for v in key], "estimate": est} for key, est in self.entries]
        return json.dumps(
            {"tours": self.tours, "graph_version": self.graph_version, "mutations": self.mutations, "top": top},
            separators=(",", ":"),
        )


def stream_loop(
    g: MutableGraph,
    p: WalkParams,
    cms: CountMinSketch,
    topn: TopN,
    mutation_source: Iterable[GraphMutation] = (),
    budget: Budget | None = None,
    snapshot_interval: int = 1000,
    batch_size: int = 100,
    mutations_per_batch: int = 1,
    decay_interval: int | None = None,
    min_matches: int = 1,
    key_width: int | None = None,
    tour_observer: Callable[[Tour, int], None] | None = None,
) -> Iterator[Snapshot]:
    """Walk forever (or until ``budget``), yielding top-n snapshots.

    Before each batch of ``batch_size`` tours up to ``mutations_per_batch``
    mutations are pulled from ``mutation_source`` and applied; failing ones
    are logged and skipped. Every accepted tour's key updates ``cms`` and is
    offered to ``topn``. With ``decay_interval`` set, sketch counters and
    top-n estimates halve every that many tours. A snapshot is emitted every
    ``snapshot_interval`` tours and once more at the end; snapshots list only
    keys estimated at ``min_matches`` or more.

    With a tour budget the loop runs until it is spent, whether or not the
    mutation source is exhausted. With no tour or time budget the loop stops
    when the mutation source is exhausted.
    """
    budget = budget or Budget()
    width = key_width or p.minm
    mutations = iter(mutation_source)
    source_open = True
    applied = errors = 0
    tours = batch_index = 0
    since_snapshot = since_decay = 0
    t0 = time.perf_counter()

    def snapshot() -> Snapshot:
        entries = [(k, e) for k, e in topn.ranked() if e >= min_matches]
        return Snapshot(tours, entries, g.version, applied, errors)

    def spent() -> bool:
        if budget.tours is not None and tours >= budget.tours:
            return True
        if budget.seconds is not None and time.perf_counter() - t0 >= budget.seconds:
            return True
        return budget.tours is None and budget.seconds is None and not source_open

    while not spent():
        for _ in range(mutations_per_batch):
            if not source_open:
                break
            m = next(mutations, None)
            if m is None:
                source_open = False
                break
            try:
                apply_mutation(g, m)
                applied += 1
            except MutationError as exc:
                errors += 1
                logger.warning("mutation rejected: %s", exc)
        if spent():
            break
        count = batch_size
        if budget.tours is not None:
            count = min(count, budget.tours - tours)
        pool = _start_pool(g)
        if len(pool) == 0:
            raise ConfigurationError("graph has no node with degree >= 1")
        indptr, indices = g.csr()
        block = _make_block(indptr, indices, pool, p.start, p.lt, count, p.master_seed, batch_index)
        batch_index += 1
        version = g.version
        accepted = block.ratios <= p.et
        for row, ok in zip(block.visits.tolist(), accepted.tolist()):
            tours += 1
            tour = Tour.from_visits(row)
            if tour_observer is not None:
                tour_observer(tour, version)
            if ok:
                try:
                    key = tour_key(tour, width)
                except KeyUnderflowError:
                    key = None
                if key is not None:
                    topn.offer(key, cms.update(key))
            since_snapshot += 1
            since_decay += 1
            if decay_interval and since_decay >= decay_interval:
                cms.halve()
                topn.halve()
                since_decay = 0
            if since_snapshot >= snapshot_interval:
                since_snapshot = 0
                yield snapshot()
    if tours and since_snapshot:
        yield snapshot()
