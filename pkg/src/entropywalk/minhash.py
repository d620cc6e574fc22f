"""Banded minhash LSH for merging tours with similar node sets.

Each hash function is ``h_i(x) = (a_i * x + b_i) mod (2**61 - 1)`` over node
ids, with ``a_i, b_i`` drawn uniformly from the field by a seeded generator.
Node ids are below ``2**31`` so the product can be formed exactly in unsigned
64-bit arithmetic by splitting ``a_i`` into 30 high and 31 low bits.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

import numpy as np

from .community import Community, CommunityKey, tour_key
from .errors import ContractError, KeyUnderflowError
from .walker import Tour

__all__ = ["minhash_signature", "lsh_bucket", "jaccard", "LshCommunityStore"]

_PRIME = np.uint64((1 << 61) - 1)
_MAX_ID = 1 << 31
_LOW31 = np.uint64((1 << 31) - 1)
_LOW30 = np.uint64((1 << 30) - 1)


@lru_cache(maxsize=64)
def _hash_params(h: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = rng.integers(1, _PRIME, size=h, dtype=np.uint64)
    b = rng.integers(0, _PRIME, size=h, dtype=np.uint64)
    return a, b


def _mulmod(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``a * x mod (2**61 - 1)`` for ``a < 2**61`` and ``x < 2**31``, no overflow."""
    hi = (a >> np.uint64(31))[:, None] * x[None, :]  # < 2**61
    # hi * 2**31 mod p is a 61-bit rotation since 2**61 == 1 (mod p)
    rot = (hi >> np.uint64(30)) + ((hi & _LOW30) << np.uint64(31))
    lo = (a & _LOW31)[:, None] * x[None, :]  # < 2**62
    return (rot % _PRIME + lo % _PRIME) % _PRIME


def minhash_signature(nodes: Iterable[int], h: int, seed: int = 0) -> np.ndarray:
    """Per-hash minimum over ``nodes``; shape ``(h,)``, dtype uint64.

    Raises:
        ContractError: ``nodes`` is empty.
    """
    x = np.fromiter(nodes, dtype=np.uint64)
    if x.size == 0:
        raise ContractError("minhash of an empty node set")
    if int(x.max()) >= _MAX_ID:
        raise ContractError("node ids must be below 2**31 for minhash")
    a, b = _hash_params(h, seed)
    vals = (_mulmod(a, x) + b[:, None]) % _PRIME
    return vals.min(axis=1)


def lsh_bucket(signature: np.ndarray, bands: int, rows: int) -> list[tuple[int, bytes]]:
    """Bucket id of each band: the band index with the bytes of its row slice."""
    if bands * rows != len(signature):
        raise ContractError(f"{bands} bands x {rows} rows != signature length {len(signature)}")
    sig = np.ascontiguousarray(signature)
    return [(i, sig[i * rows : (i + 1) * rows].tobytes()) for i in range(bands)]


def jaccard(a: frozenset | set, b: frozenset | set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


class LshCommunityStore:
    """Community store whose buckets are found by banded minhash collisions.

    A tour colliding with an existing community in at least one band merges
    into it when the Jaccard similarity of its distinct nodes and the
    community's founding tour's distinct nodes reaches ``j_min``. Among
    several qualifying candidates the most similar wins, ties to the oldest.
    Unlike :class:`~entropywalk.community.CommunityStore` the result depends
    on insertion order; callers feed tours in tour-index order.
    """

    def __init__(self, key_width: int, bands: int = 8, rows: int = 4, j_min: float = 0.6, seed: int = 0):
        self.key_width = key_width
        self.bands = bands
        self.rows = rows
        self.j_min = j_min
        self.seed = seed
        self._communities: list[Community] = []
        self._founders: list[frozenset[int]] = []
        self._tables: dict[tuple[int, bytes], list[int]] = {}
        self.accepted_total = 0
        self.underflow = 0

    def insert_or_merge(self, t: Tour) -> Community | None:
        try:
            key: CommunityKey = tour_key(t, self.key_width)
        except KeyUnderflowError:
            self.underflow += 1
            return None
        nodes = frozenset(t.freq)
        sig = minhash_signature(sorted(nodes), self.bands * self.rows, self.seed)
        bucket_ids = lsh_bucket(sig, self.bands, self.rows)
        candidates = sorted({cid for b in bucket_ids for cid in self._tables.get(b, ())})
        best, best_j = None, -1.0
        for cid in candidates:
            j = jaccard(nodes, self._founders[cid])
            if j >= self.j_min and j > best_j:
                best, best_j = cid, j
        self.accepted_total += 1
        if best is not None:
            c = self._communities[best]
            c.merge(t)
            return c
        cid = len(self._communities)
        c = Community(key=key)
        c.merge(t)
        self._communities.append(c)
        self._founders.append(nodes)
        for b in bucket_ids:
            self._tables.setdefault(b, []).append(cid)
        return c

    def communities(self) -> list[Community]:
        return list(self._communities)

    def __len__(self) -> int:
        return len(self._communities)
