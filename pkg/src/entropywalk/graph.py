"""Graph storage, edge-list I/O, synthetic generators and structural metrics.

Nodes carry string labels that are interned to dense integer ids in order of
first appearance. Adjacency lists keep insertion order so walks are
reproducible for a given input file.
"""

from __future__ import annotations

import io
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, TextIO

import numpy as np

from .errors import ConfigurationError, DomainError, ParseError

logger = logging.getLogger(__name__)

__all__ = [
    "Graph",
    "GraphMetrics",
    "load_edge_list",
    "read_edge_list",
    "write_edge_list",
    "neighbors",
    "avg_clustering",
    "local_clustering",
    "graph_metrics",
    "generate_barabasi_albert",
    "generate_ring_of_cliques",
    "generate_gnm",
    "planted_cliques",
    "load_toy_graph",
]


class Graph:
    """Simple graph (no self-loops, no multi-edges) over labelled nodes.

    Treat instances as read-only while walks run; the streaming module
    subclasses this with mutation methods that bump :attr:`version`.
    """

    def __init__(self, directed: bool = False):
        self.directed = directed
        self.edge_count = 0
        self.version = 0
        self._adj: list[list[int]] = []
        self._nbr_sets: list[set[int]] = []
        self._labels: list[str] = []
        self._index: dict[str, int] = {}
        self._csr: tuple[int, np.ndarray, np.ndarray] | None = None

    # -- nodes -------------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    def label(self, v: int) -> str:
        self._check(v)
        return self._labels[v]

    def node_id(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DomainError(f"unknown node label {label!r}") from None

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def intern(self, label: str) -> int:
        """Return the id of ``label``, adding a new node if needed."""
        v = self._index.get(label)
        if v is None:
            v = len(self._labels)
            self._labels.append(label)
            self._index[label] = v
            self._adj.append([])
            self._nbr_sets.append(set())
            self._touch()
        return v

    # -- edges -------------------------------------------------------------

    def _add_edge_ids(self, u: int, v: int) -> bool:
        # returns False on self-loop or an edge already present
        if u == v or v in self._nbr_sets[u]:
            return False
        self._adj[u].append(v)
        self._nbr_sets[u].add(v)
        if not self.directed:
            self._adj[v].append(u)
            self._nbr_sets[v].add(u)
        self.edge_count += 1
        self._touch()
        return True

    def add_edge(self, a: str, b: str) -> bool:
        """Add an edge between two labels, interning them. Returns True if new."""
        return self._add_edge_ids(self.intern(a), self.intern(b))

    def has_edge(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        return v in self._nbr_sets[u]

    def neighbors(self, v: int) -> list[int]:
        self._check(v)
        return list(self._adj[v])

    def degree(self, v: int) -> int:
        self._check(v)
        return len(self._adj[v])

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self._adj), dtype=np.int64, count=self.node_count)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as id pairs sorted by (min-id, max-id); (src, dst) if directed."""
        if self.directed:
            pairs = ((u, v) for u, nbrs in enumerate(self._adj) for v in nbrs)
        else:
            pairs = ((u, v) for u, nbrs in enumerate(self._adj) for v in nbrs if u < v)
        yield from sorted(pairs)

    def labelled_edges(self) -> set[frozenset[str]] | set[tuple[str, str]]:
        """Edge set keyed by labels, for isomorphism checks across id orders."""
        lab = self._labels
        if self.directed:
            return {(lab[u], lab[v]) for u, v in self.edges()}
        return {frozenset((lab[u], lab[v])) for u, v in self.edges()}

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Compressed adjacency ``(indptr, indices)``, cached per graph version."""
        if self._csr is None or self._csr[0] != self.version:
            deg = self.degrees()
            indptr = np.zeros(self.node_count + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            indices = np.fromiter(
                (v for nbrs in self._adj for v in nbrs), dtype=np.int64, count=int(indptr[-1])
            )
            self._csr = (self.version, indptr, indices)
        return self._csr[1], self._csr[2]

    def _touch(self) -> None:
        self.version += 1

    def _check(self, v: int) -> None:
        if not 0 <= v < len(self._labels):
            raise DomainError(f"node id {v} out of range [0, {len(self._labels)})")

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"<Graph {kind} nodes={self.node_count} edges={self.edge_count}>"


@dataclass
class GraphMetrics:
    avg_clustering: float
    degree_histogram: dict[int, int] = field(default_factory=dict)


def neighbors(g: Graph, v: int) -> list[int]:
    return g.neighbors(v)


# -- I/O ------------------------------------------------------------------


def load_edge_list(stream: TextIO | Iterable[str], directed: bool = False) -> Graph:
    """Parse a whitespace-separated edge list.

    Blank lines and lines starting with ``#`` are ignored; a third column is
    accepted and dropped. Repeated edges collapse and self-loops are skipped;
    the number skipped is kept on ``graph.self_loops_skipped``.

    Raises:
        ParseError: a line with fewer than two or more than three tokens.
    """
    g = Graph(directed=directed)
    loops = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if not 2 <= len(tokens) <= 3:
            raise ParseError(f"expected 2 or 3 columns, got {len(tokens)}", line=lineno)
        a, b = tokens[0], tokens[1]
        if a == b:
            loops += 1
            continue
        g.add_edge(a, b)
    if loops:
        logger.warning("skipped %d self-loop line(s)", loops)
    g.self_loops_skipped = loops
    return g


def read_edge_list(path: str, directed: bool = False) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, directed=directed)


def write_edge_list(g: Graph, stream: TextIO) -> None:
    lab = g._labels
    for u, v in g.edges():
        stream.write(f"{lab[u]} {lab[v]}\n")


def load_toy_graph() -> Graph:
    """The bundled 30-node two-block ingredient graph."""
    text = resources.files("entropywalk.data").joinpath("sweets_savory.txt").read_text("utf-8")
    return load_edge_list(io.StringIO(text))


# -- metrics --------------------------------------------------------------


def local_clustering(g: Graph, v: int) -> float:
    nbrs = g._nbr_sets[v]
    k = len(nbrs)
    if k < 2:
        return 0.0
    links = sum(len(g._nbr_sets[u] & nbrs) for u in nbrs)
    # each neighbor pair counted from both ends
    return links / (k * (k - 1))


def avg_clustering(g: Graph) -> float:
    """Mean local clustering coefficient; nodes of degree < 2 contribute 0."""
    if g.node_count == 0:
        return 0.0
    return sum(local_clustering(g, v) for v in range(g.node_count)) / g.node_count


def graph_metrics(g: Graph) -> GraphMetrics:
    hist = Counter(int(d) for d in g.degrees())
    return GraphMetrics(avg_clustering=avg_clustering(g), degree_histogram=dict(sorted(hist.items())))


# -- generators -----------------------------------------------------------


def generate_barabasi_albert(n: int, m: int, seed: int | None = None) -> Graph:
    """Preferential-attachment graph grown from an ``m``-clique core.

    Node ``m`` attaches to every core node; each later node attaches to ``m``
    distinct existing nodes chosen with probability proportional to degree.
    The result has exactly ``m*(n-m) + m*(m-1)/2`` edges. Labels are the
    decimal node ids.
    """
    if m < 1 or n <= m:
        raise ConfigurationError(f"Barabasi-Albert needs n > m >= 1, got n={n}, m={m}")
    rng = random.Random(seed)
    g = Graph()
    for v in range(n):
        g.intern(str(v))
    # every edge endpoint once: uniform draws are degree-proportional
    endpoints: list[int] = []
    for u in range(m):
        for v in range(u + 1, m):
            g._add_edge_ids(u, v)
            endpoints += (u, v)
    for v in range(m):
        g._add_edge_ids(m, v)
        endpoints += (m, v)
    for source in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(endpoints[rng.randrange(len(endpoints))])
        for t in sorted(targets):
            g._add_edge_ids(source, t)
            endpoints += (source, t)
    return g


def generate_ring_of_cliques(k: int, c: int, seed: int | None = None) -> Graph:
    """``k`` disjoint ``c``-cliques joined in a ring by one bridge per consecutive pair.

    Node labels are ``q{clique}_{member}``. Without a seed the bridge from
    clique ``i`` leaves its last member and enters the first member of clique
    ``i+1``; a seed samples distinct entry and exit members per clique.
    """
    if k < 2 or c < 3:
        raise ConfigurationError(f"ring of cliques needs k >= 2 and c >= 3, got k={k}, c={c}")
    rng = random.Random(seed) if seed is not None else None
    g = Graph()
    for i in range(k):
        ids = [g.intern(f"q{i}_{j}") for j in range(c)]
        for a in range(c):
            for b in range(a + 1, c):
                g._add_edge_ids(ids[a], ids[b])
    ports = []
    for i in range(k):
        entry, exit_ = rng.sample(range(c), 2) if rng else (0, c - 1)
        ports.append((i * c + entry, i * c + exit_))
    for i in range(k):
        g._add_edge_ids(ports[i][1], ports[(i + 1) % k][0])
    return g


def planted_cliques(g: Graph) -> list[frozenset[int]]:
    """Recover the planted blocks of a ring-of-cliques graph from its labels."""
    groups: dict[str, set[int]] = {}
    for v, lab in enumerate(g._labels):
        groups.setdefault(lab.split("_", 1)[0], set()).add(v)
    return [frozenset(s) for _, s in sorted(groups.items(), key=lambda kv: min(kv[1]))]


def generate_gnm(n: int, edges: int, seed: int | None = None) -> Graph:
    """Uniform random simple graph with ``n`` nodes and ``edges`` edges."""
    if edges > n * (n - 1) // 2:
        raise ConfigurationError(f"{edges} edges do not fit in a simple graph of {n} nodes")
    rng = random.Random(seed)
    g = Graph()
    for v in range(n):
        g.intern(str(v))
    while g.edge_count < edges:
        u, v = rng.randrange(n), rng.randrange(n)
        g._add_edge_ids(u, v)
    return g
