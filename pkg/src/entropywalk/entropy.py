"""Shannon entropy of tours and the normalized acceptance test.

For a tour of ``lt`` visits with per-node counts ``c_i`` the entropy is
``H = sum p_i * ln(1/p_i)`` with ``p_i = c_i / lt``. The normalizer is the
entropy of a walk that never revisits a node, ``ln(lt)``. Both are computed
through the identity ``H = ln(lt) - sum(c_i * ln c_i) / lt``, which is exact
when every count is 1, so all-distinct tours score a ratio of exactly 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ContractError

if TYPE_CHECKING:
    from .walker import Tour

__all__ = ["EntropyReport", "tour_entropy", "accept_tour", "entropy_ratios"]


@dataclass(frozen=True)
class EntropyReport:
    h: float
    h_max: float
    ratio: float


def _entropy_from_counts(counts, lt: int, log) -> float:
    s = 0.0
    for c in counts:
        s += c * log(c)
    return max(log(lt) - s / lt, 0.0)


def tour_entropy(t: Tour, base: float | None = None) -> EntropyReport:
    """Entropy of ``t``'s visit-frequency distribution and its normalized ratio.

    Natural log unless ``base`` is given; the ratio does not depend on base.

    Raises:
        ContractError: the tour is incomplete or shorter than two visits.
    """
    lt = len(t.visits)
    if not t.complete or lt < 2:
        raise ContractError(f"entropy needs a complete tour of >= 2 visits (got {lt}, complete={t.complete})")
    log = math.log if base is None else (lambda x: math.log(x, base))
    h = _entropy_from_counts([c for _, c in sorted(t.freq.items())], lt, log)
    h_max = log(lt)
    return EntropyReport(h=h, h_max=h_max, ratio=min(h / h_max, 1.0))


def accept_tour(t: Tour, et: float) -> bool:
    """True when the tour's entropy ratio is at most ``et`` (boundary inclusive)."""
    return tour_entropy(t).ratio <= et


def entropy_ratios(visits: np.ndarray) -> np.ndarray:
    """Entropy ratio of every row of a ``(tours, lt)`` visit matrix.

    Same arithmetic as :func:`tour_entropy`, vectorized over rows.
    """
    n, lt = visits.shape
    if n == 0:
        return np.empty(0)
    if lt < 2:
        raise ContractError("entropy needs tours of >= 2 visits")
    s = np.sort(visits, axis=1)
    head = np.ones((n, lt), dtype=bool)
    head[:, 1:] = s[:, 1:] != s[:, :-1]
    starts = np.flatnonzero(head)
    runs = np.diff(np.append(starts, n * lt)).astype(np.float64)
    rows = starts // lt
    clogc = runs * np.log(runs)
    s_row = np.bincount(rows, weights=clogc, minlength=n)
    log_lt = math.log(lt)
    h = np.maximum(log_lt - s_row / lt, 0.0)
    return np.minimum(h / log_lt, 1.0)
