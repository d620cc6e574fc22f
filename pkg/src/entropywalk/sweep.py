"""Parameter sweeps producing plot-ready ``x,mean,sd,replicates`` rows.

Each sweep point is replicated with seeds ``seed + r``. The entropy-threshold
sweep scores one fixed tour set per replicate against every threshold, so the
accepted fraction is monotone in the threshold by construction.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from typing import Callable, Sequence, TextIO

import numpy as np

from .community import CommunityStore
from .errors import ConfigurationError
from .graph import Graph, avg_clustering, generate_barabasi_albert, generate_ring_of_cliques
from .walker import Tour, WalkParams, tour_blocks

__all__ = ["SweepRow", "sweep_et", "sweep_graphs", "graph_family", "write_csv", "METRICS"]

METRICS = ("accepted", "tours", "buckets", "clustering")


@dataclass
class SweepRow:
    x: float
    mean: float
    sd: float
    replicates: int


def _row(x, values: Sequence[float]) -> SweepRow:
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return SweepRow(x=x, mean=statistics.fmean(values), sd=sd, replicates=len(values))


def _replicate(p: WalkParams, r: int, **changes) -> WalkParams:
    fields = {**p.__dict__, "master_seed": p.master_seed + r, **changes}
    return WalkParams(**fields)


def sweep_et(
    g: Graph,
    p: WalkParams,
    thresholds: Sequence[float],
    metric: str = "accepted",
    replicates: int = 5,
    key_width: int | None = None,
) -> list[SweepRow]:
    """Accepted fraction, accepted count or bucket count per entropy threshold."""
    if metric not in ("accepted", "tours", "buckets"):
        raise ConfigurationError(f"metric {metric!r} is not defined for a threshold sweep")
    per_x: dict[float, list[float]] = {et: [] for et in thresholds}
    for r in range(replicates):
        q = _replicate(p, r, et=1.0)
        blocks = list(tour_blocks(g, q))
        ratios = np.concatenate([b.ratios for b in blocks]) if blocks else np.empty(0)
        for et in thresholds:
            accepted = ratios <= et
            if metric == "accepted":
                per_x[et].append(float(accepted.mean()) if accepted.size else 0.0)
            elif metric == "tours":
                per_x[et].append(float(accepted.sum()))
            else:
                store = CommunityStore(key_width or p.minm)
                offset = 0
                for b in blocks:
                    mask = accepted[offset : offset + len(b.visits)]
                    offset += len(b.visits)
                    for row in b.visits[mask].tolist():
                        store.insert_or_merge(Tour.from_visits(row))
                per_x[et].append(float(len(store)))
    return [_row(et, per_x[et]) for et in thresholds]


def graph_family(family: str, **fixed) -> Callable[[float, int], Graph]:
    """Factory ``(x, seed) -> Graph`` for a sweep axis.

    ``ba-nodes`` varies n with fixed m; ``ba-m`` varies m with fixed n;
    ``ring-nodes`` varies total nodes with fixed clique size c.
    """
    if family == "ba-nodes":
        return lambda x, seed: generate_barabasi_albert(int(x), fixed["m"], seed)
    if family == "ba-m":
        return lambda x, seed: generate_barabasi_albert(fixed["n"], int(x), seed)
    if family == "ring-nodes":
        c = fixed["c"]
        return lambda x, seed: generate_ring_of_cliques(max(int(x) // c, 2), c, seed)
    raise ConfigurationError(f"unknown graph family {family!r}")


def sweep_graphs(
    make_graph: Callable[[float, int], Graph],
    xs: Sequence[float],
    p: WalkParams,
    metric: str = "buckets",
    replicates: int = 5,
    key_width: int | None = None,
) -> list[SweepRow]:
    """Regenerate the graph per point and replicate, then measure ``metric``."""
    if metric not in METRICS:
        raise ConfigurationError(f"unknown metric {metric!r}")
    rows = []
    for x in xs:
        values = []
        for r in range(replicates):
            q = _replicate(p, r)
            g = make_graph(x, q.master_seed)
            if metric == "clustering":
                values.append(avg_clustering(g))
                continue
            blocks = tour_blocks(g, q)
            if metric in ("accepted", "tours"):
                acc = sum(int((b.ratios <= q.et).sum()) for b in blocks)
                values.append(acc / q.nt if metric == "accepted" and q.nt else float(acc))
            else:
                store = CommunityStore(key_width or q.minm)
                for b in blocks:
                    for row in b.visits[b.ratios <= q.et].tolist():
                        store.insert_or_merge(Tour.from_visits(row))
                values.append(float(len(store)))
        rows.append(_row(x, values))
    return rows


def write_csv(rows: Sequence[SweepRow], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["x", "mean", "sd", "replicates"])
    for r in rows:
        w.writerow([repr(float(r.x)), repr(r.mean), repr(r.sd), r.replicates])
