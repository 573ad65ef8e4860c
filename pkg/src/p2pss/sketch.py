"""Space-Saving stream summaries and their mergeable algebra.

A :class:`StreamSummary` holds at most ``capacity`` counters, each an item
with a (possibly fractional) estimated frequency. Besides the classic stream
update it supports the k-bounded merge, scaling by a positive scalar and
top-k pruning, which together are enough to run averaging gossip on
summaries.

Ties are resolved deterministically: the stream update evicts the
smallest item id among the minimum-frequency counters, while pruning keeps
the smaller item ids among equally frequent candidates.

Internally a summary is either a dict (while it is being fed a stream) or a
pair of arrays sorted by item id (after merge/scale/prune). Each form is
materialized from the other on demand.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

import numpy as np

ITEM_DTYPE = np.int64


@dataclass(frozen=True, order=True)
class Counter:
    item: int
    freq: float


class StreamSummary:
    """Bounded set of ``item -> estimated frequency`` counters.

    The minimum frequency follows the under-full convention: it is 0 while
    fewer than ``capacity`` counters are held.
    """

    __slots__ = ("capacity", "_counts", "_heap", "_keys", "_vals")

    def __init__(self, capacity: int, counts: Optional[Mapping[int, float]] = None):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self._counts: Optional[dict] = {int(x): f for x, f in counts.items()} if counts else {}
        if len(self._counts) > self.capacity:
            raise ValueError("more counters than capacity")
        # Min-heap of (freq lower bound, item), one entry per monitored item.
        # Increments leave it untouched; stale tops are refreshed on demand.
        self._heap: Optional[list] = None
        self._keys: Optional[np.ndarray] = None
        self._vals: Optional[np.ndarray] = None

    @classmethod
    def _from_arrays(cls, capacity: int, keys: np.ndarray, vals: np.ndarray) -> "StreamSummary":
        # keys must be sorted and unique; ownership of both arrays is taken.
        summary = cls.__new__(cls)
        summary.capacity = capacity
        summary._counts = None
        summary._heap = None
        summary._keys = keys
        summary._vals = vals
        return summary

    @classmethod
    def from_stream(cls, items: Iterable[int], capacity: int) -> "StreamSummary":
        summary = cls(capacity)
        summary.extend(items)
        return summary

    # -- representations ------------------------------------------------

    def _dict(self) -> dict:
        if self._counts is None:
            self._counts = dict(zip(self._keys.tolist(), self._vals.tolist()))
        return self._counts

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(items, freqs)`` sorted by item id. Treat as read-only."""
        if self._keys is None:
            counts = self._counts
            keys = np.fromiter(counts.keys(), dtype=ITEM_DTYPE, count=len(counts))
            vals = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
            order = np.argsort(keys, kind="stable")
            self._keys, self._vals = keys[order], vals[order]
        return self._keys, self._vals

    def _mutable(self) -> dict:
        counts = self._dict()
        self._keys = self._vals = None
        if self._heap is None:
            self._heap = [(f, x) for x, f in counts.items()]
            heapq.heapify(self._heap)
        return counts

    # -- streaming -------------------------------------------------------

    def _fresh_top(self) -> tuple:
        heap, counts = self._heap, self._counts
        f, x = heap[0]
        while counts[x] != f:
            heapq.heapreplace(heap, (counts[x], x))
            f, x = heap[0]
        return f, x

    def update(self, item: int) -> None:
        """Process one stream occurrence of ``item`` (in place)."""
        self.extend((item,))

    def extend(self, items: Iterable[int]) -> None:
        counts = self._mutable()
        heap = self._heap
        cap = self.capacity
        push, replace = heapq.heappush, heapq.heapreplace
        for item in items:
            f = counts.get(item)
            if f is not None:
                counts[item] = f + 1
            elif len(counts) < cap:
                counts[item] = 1
                push(heap, (1, item))
            else:
                low, victim = heap[0]
                while counts[victim] != low:
                    replace(heap, (counts[victim], victim))
                    low, victim = heap[0]
                del counts[victim]
                counts[item] = low + 1
                replace(heap, (low + 1, item))

    # -- queries ---------------------------------------------------------

    def min_freq(self) -> float:
        if len(self) < self.capacity:
            return 0.0
        if self._heap is not None and self._counts is not None:
            return float(self._fresh_top()[0])
        return float(self.arrays()[1].min())

    def get(self, item: int, default=None):
        return self._dict().get(item, default)

    def __getitem__(self, item: int) -> float:
        return self._dict()[item]

    def __contains__(self, item: object) -> bool:
        return item in self._dict()

    def __len__(self) -> int:
        return len(self._counts) if self._counts is not None else len(self._keys)

    def __iter__(self) -> Iterator[int]:
        return iter(self._dict())

    def items(self):
        return self._dict().items()

    def as_dict(self) -> dict:
        return dict(self._dict())

    def total(self) -> float:
        return float(self.arrays()[1].sum())

    def counters(self) -> list[Counter]:
        """Counters ordered by decreasing frequency, then increasing item."""
        ordered = sorted(self._dict().items(), key=lambda kv: (-kv[1], kv[0]))
        return [Counter(x, f) for x, f in ordered]

    def copy(self) -> "StreamSummary":
        return StreamSummary(self.capacity, self._dict())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StreamSummary):
            return NotImplemented
        if self.capacity != other.capacity or len(self) != len(other):
            return False
        k1, v1 = self.arrays()
        k2, v2 = other.arrays()
        return bool(np.array_equal(k1, k2) and np.array_equal(v1, v2))

    __hash__ = None

    def __repr__(self) -> str:
        shown = ", ".join(f"({c.item}, {c.freq:g})" for c in self.counters()[:8])
        more = "" if len(self) <= 8 else f", ... {len(self) - 8} more"
        return f"StreamSummary(k={self.capacity}, [{shown}{more}])"


def ss_process(summary: StreamSummary, item: int) -> StreamSummary:
    summary.update(item)
    return summary


def ss_min(summary: StreamSummary) -> float:
    return summary.min_freq()


def _top_k(keys: np.ndarray, vals: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    # keys sorted ascending; result stays sorted by key.
    if len(keys) <= k:
        return keys, vals
    cut = np.partition(vals, len(vals) - k)[len(vals) - k]
    above = vals > cut
    need = k - int(above.sum())
    tied = np.flatnonzero(vals == cut)[:need]
    above[tied] = True
    return keys[above], vals[above]


Candidates = Union[Mapping[int, float], Iterable[Counter], Iterable[tuple]]


def prune(candidates: Candidates, k: int) -> StreamSummary:
    """Keep the ``k`` most frequent candidates (smaller item wins ties)."""
    if isinstance(candidates, Mapping):
        pairs = list(candidates.items())
    else:
        pairs = [(c.item, c.freq) if isinstance(c, Counter) else tuple(c) for c in candidates]
    keys = np.array([x for x, _ in pairs], dtype=ITEM_DTYPE)
    vals = np.array([f for _, f in pairs], dtype=np.float64)
    order = np.argsort(keys, kind="stable")
    keys, vals = keys[order], vals[order]
    if len(keys) > 1 and np.any(keys[1:] == keys[:-1]):
        raise ValueError("duplicate candidate items")
    keys, vals = _top_k(keys, vals, k)
    return StreamSummary._from_arrays(k, keys, vals)


def merge(s1: StreamSummary, s2: StreamSummary, k: int) -> StreamSummary:
    """Unscaled k-bounded merge of two summaries.

    Shared items get the sum of their frequencies; an item held by only one
    side is credited with the other side's minimum frequency. The result is
    pruned to ``k`` counters.
    """
    m1, m2 = s1.min_freq(), s2.min_freq()
    k1, v1 = s1.arrays()
    k2, v2 = s2.arrays()
    keys = np.union1d(k1, k2)
    left = np.full(len(keys), m1)
    left[np.searchsorted(keys, k1)] = v1
    right = np.full(len(keys), m2)
    right[np.searchsorted(keys, k2)] = v2
    keys, vals = _top_k(keys, left + right, k)
    return StreamSummary._from_arrays(k, keys, vals)


def scale(summary: StreamSummary, d: float) -> StreamSummary:
    """Divide every frequency by ``d``; the support is unchanged."""
    if not d > 0:
        raise ValueError(f"scale divisor must be positive, got {d}")
    keys, vals = summary.arrays()
    return StreamSummary._from_arrays(summary.capacity, keys, vals / d)
