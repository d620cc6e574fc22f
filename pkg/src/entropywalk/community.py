"""Community records built by bucketing and merging accepted tours.

The default bucket key of a tour is the set of its ``n`` most frequent nodes,
a single-hash stand-in for full LSH. Tours landing on the same key merge:
their node frequencies add up and the community's match counter grows.
:mod:`entropywalk.minhash` provides the banded-minhash alternative.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .errors import ContractError, KeyUnderflowError
from .walker import Tour

__all__ = [
    "CommunityKey",
    "Community",
    "CommunityStore",
    "CommunityRecord",
    "tour_key",
    "extract_members",
    "top_communities",
    "rank_communities",
    "DEFAULT_MIN_SHARE",
]

CommunityKey = tuple[int, ...]

# members must reach this fraction of the top member's cumulative frequency
DEFAULT_MIN_SHARE = 0.25


def _ranked(freq: dict[int, int]) -> list[tuple[int, int]]:
    return sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))


def tour_key(t: Tour, n: int) -> CommunityKey:
    """The ``n`` most frequent nodes of ``t`` (ties by lower id), sorted by id.

    Raises:
        KeyUnderflowError: the tour visits fewer than ``n`` distinct nodes.
    """
    if len(t.freq) < n:
        raise KeyUnderflowError(f"tour has {len(t.freq)} distinct nodes, key needs {n}")
    return tuple(sorted(v for v, _ in _ranked(t.freq)[:n]))


@dataclass
class Community:
    key: CommunityKey
    freq: Counter = field(default_factory=Counter)
    matches: int = 0

    def merge(self, t: Tour) -> None:
        self.freq.update(t.freq)
        self.matches += 1

    @property
    def visits(self) -> int:
        return sum(self.freq.values())


class Store(Protocol):
    accepted_total: int
    underflow: int

    def insert_or_merge(self, t: Tour) -> Community | None: ...

    def communities(self) -> list[Community]: ...


class CommunityStore:
    """Hash table from :data:`CommunityKey` to :class:`Community`.

    Merging is a pointwise sum plus a counter increment, so the final table
    does not depend on insertion order.
    """

    def __init__(self, key_width: int):
        if key_width < 1:
            raise ContractError(f"key width must be >= 1, got {key_width}")
        self.key_width = key_width
        self.buckets: dict[CommunityKey, Community] = {}
        self.accepted_total = 0
        self.underflow = 0

    def insert_or_merge(self, t: Tour) -> Community | None:
        """Merge ``t`` into its bucket; returns None when the key underflows."""
        try:
            key = tour_key(t, self.key_width)
        except KeyUnderflowError:
            self.underflow += 1
            return None
        c = self.buckets.get(key)
        if c is None:
            c = self.buckets[key] = Community(key=key)
        c.merge(t)
        self.accepted_total += 1
        return c

    def extend(self, tours: Iterable[Tour]) -> None:
        for t in tours:
            self.insert_or_merge(t)

    def communities(self) -> list[Community]:
        return list(self.buckets.values())

    def __len__(self) -> int:
        return len(self.buckets)

    def snapshot(self) -> dict[CommunityKey, tuple[int, dict[int, int]]]:
        """Order-free view of the store, for equality checks."""
        return {k: (c.matches, dict(sorted(c.freq.items()))) for k, c in sorted(self.buckets.items())}


def extract_members(
    c: Community, minm: int, maxm: int, min_share: float = DEFAULT_MIN_SHARE
) -> list[int]:
    """Members of ``c`` ranked by cumulative frequency, at most ``maxm`` of them.

    Nodes below ``min_share`` times the top node's frequency are stray visits
    rather than members and are dropped. Returns an empty list (the community
    is suppressed) when fewer than ``minm`` members remain.
    """
    if minm > maxm:
        raise ContractError(f"min members {minm} > max members {maxm}")
    ranked = _ranked(c.freq)
    if not ranked:
        return []
    floor = min_share * ranked[0][1]
    members = [v for v, f in ranked[:maxm] if f >= floor]
    return members if len(members) >= minm else []


def top_communities(store: Store, k: int, min_matches: int = 1) -> list[Community]:
    """Buckets with at least ``min_matches`` merges, strongest first, ties by key."""
    if k <= 0:
        return []
    kept = [c for c in store.communities() if c.matches >= min_matches]
    kept.sort(key=lambda c: (-c.matches, c.key))
    return kept[:k]


@dataclass
class CommunityRecord:
    """One reported community: ranked members and their cumulative frequencies."""

    matches: int
    members: list[int]
    freq: list[int]
    key: CommunityKey
    buckets: int = 1


def rank_communities(
    store: Store,
    minm: int,
    maxm: int,
    k: int | None = None,
    min_matches: int = 1,
    min_share: float = DEFAULT_MIN_SHARE,
    merge_identical: bool = True,
    require: int | None = None,
) -> tuple[list[CommunityRecord], int]:
    """Extract members of every bucket and rank the resulting communities.

    Buckets whose extracted member sets coincide describe the same community
    and are combined (matches and frequencies summed) unless
    ``merge_identical`` is off. ``require`` keeps only communities containing
    that node. Returns the ranked records and the number of suppressed buckets.
    """
    groups: dict[frozenset[int], CommunityRecord] = {}
    order: list[CommunityRecord] = []
    suppressed = 0
    for c in sorted(store.communities(), key=lambda c: c.key):
        members = extract_members(c, minm, maxm, min_share)
        if not members:
            suppressed += 1
            continue
        ident = frozenset(members) if merge_identical else frozenset([("bucket", c.key)])
        rec = groups.get(ident)
        if rec is None:
            rec = groups[ident] = CommunityRecord(
                matches=0, members=members, freq=[0] * len(members), key=c.key, buckets=0
            )
            order.append(rec)
        rec.matches += c.matches
        rec.buckets += 1
        rec.freq = [f + c.freq[v] for v, f in zip(rec.members, rec.freq)]
    for rec in order:
        ranked = sorted(zip(rec.members, rec.freq), key=lambda vf: (-vf[1], vf[0]))
        rec.members = [v for v, _ in ranked]
        rec.freq = [f for _, f in ranked]
    out = [r for r in order if r.matches >= min_matches and (require is None or require in r.members)]
    out.sort(key=lambda r: (-r.matches, r.key))
    if k is not None:
        out = out[: max(k, 0)]
    return out, suppressed
