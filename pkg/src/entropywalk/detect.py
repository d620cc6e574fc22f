"""End-to-end detection: walk, filter by entropy, bucket and merge."""

from __future__ import annotations

from dataclasses import dataclass

from .centrality import CentralityTable
from .community import CommunityStore, Store
from .graph import Graph
from .minhash import LshCommunityStore
from .walker import RunStats, Tour, WalkParams, run_tours

__all__ = ["Detection", "detect", "make_store"]


@dataclass
class Detection:
    store: Store
    stats: RunStats
    centrality: CentralityTable | None = None


def make_store(
    p: WalkParams,
    key_width: int | None = None,
    mode: str = "key",
    bands: int = 8,
    rows: int = 4,
    j_min: float = 0.6,
) -> Store:
    width = key_width or p.minm
    if mode == "key":
        return CommunityStore(width)
    if mode == "lsh":
        return LshCommunityStore(width, bands=bands, rows=rows, j_min=j_min, seed=p.master_seed)
    raise ValueError(f"unknown bucketing mode {mode!r}")


def detect(
    g: Graph,
    p: WalkParams,
    key_width: int | None = None,
    mode: str = "key",
    bands: int = 8,
    rows: int = 4,
    j_min: float = 0.6,
    threads: int = 1,
    with_centrality: bool = False,
) -> Detection:
    """Run ``p.nt`` tours and merge the entropy-accepted ones into a store.

    ``key_width`` defaults to ``p.minm``. With ``with_centrality`` the
    accepted tours also feed a :class:`CentralityTable`.
    """
    store = make_store(p, key_width, mode, bands, rows, j_min)
    table = CentralityTable(g.node_count) if with_centrality else None

    def sink(t: Tour) -> None:
        store.insert_or_merge(t)
        if table is not None:
            table.accumulate(t)

    stats = run_tours(g, p, sink=sink, threads=threads)
    stats.extra["buckets"] = len(store.communities())
    stats.extra["key_underflow"] = store.underflow
    return Detection(store=store, stats=stats, centrality=table)
