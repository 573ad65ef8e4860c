"""Zipfian streams, their partition across peers, and exact ground truth."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

ITEM_DTYPE = np.uint32


@dataclass(frozen=True)
class StreamSpec:
    n: int
    m: int = 1_000_000
    rho: float = 1.2
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.rho <= 0:
            raise ValueError(f"invalid stream spec {self}")
        if self.m > np.iinfo(ITEM_DTYPE).max:
            raise ValueError("universe does not fit 32-bit item ids")


@lru_cache(maxsize=8)
def _zipf_cdf(m: int, rho: float) -> np.ndarray:
    w = np.arange(1, m + 1, dtype=np.float64) ** (-rho)
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    cdf.flags.writeable = False
    return cdf


def zipf_normalizer(m: int, rho: float) -> float:
    return float(np.sum(np.arange(1, m + 1, dtype=np.float64) ** (-rho)))


def gen_zipf(spec: StreamSpec) -> np.ndarray:
    """``n`` items with P(rank i) proportional to i^-rho over a universe of ``m``.

    Ranks map to item ids ``1..m`` through a seeded permutation, so the most
    frequent item is not simply item 1.
    """
    rng = np.random.default_rng(spec.seed)
    ranks = np.searchsorted(_zipf_cdf(spec.m, spec.rho), rng.random(spec.n), side="right")
    np.minimum(ranks, spec.m - 1, out=ranks)
    item_of_rank = rng.permutation(spec.m).astype(ITEM_DTYPE) + 1
    return item_of_rank[ranks]


@dataclass(frozen=True)
class Contiguous:
    pass


@dataclass(frozen=True)
class RoundRobin:
    pass


@dataclass(frozen=True)
class Shuffled:
    seed: int = 0


@dataclass(frozen=True)
class Adversarial:
    """Every copy of one item lands on peer 0 (the most frequent item by default)."""

    item: Optional[int] = None


PartitionScheme = Union[Contiguous, RoundRobin, Shuffled, Adversarial]


def partition(stream: np.ndarray, p: int, scheme: PartitionScheme = Contiguous()) -> list[np.ndarray]:
    """Split ``stream`` into ``p`` disjoint local streams.

    Local sizes differ by at most one, except under :class:`Adversarial`,
    which deliberately concentrates one item.
    """
    if p < 1:
        raise ValueError(f"need at least one peer, got {p}")
    stream = np.asarray(stream)
    if isinstance(scheme, Contiguous):
        return np.array_split(stream, p)
    if isinstance(scheme, RoundRobin):
        return [stream[l::p] for l in range(p)]
    if isinstance(scheme, Shuffled):
        perm = np.random.default_rng(scheme.seed).permutation(len(stream))
        return np.array_split(stream[perm], p)
    if isinstance(scheme, Adversarial):
        item = scheme.item
        if len(stream) == 0:
            return np.array_split(stream, p)
        if item is None:
            values, counts = np.unique(stream, return_counts=True)
            item = values[np.argmax(counts)]
        hot = stream == item
        parts = np.array_split(stream[~hot], p)
        parts[0] = np.concatenate([stream[hot], parts[0]])
        return parts
    raise ValueError(f"unknown partition scheme {scheme!r}")


@dataclass(frozen=True)
class GroundTruth:
    freqs: dict  # item -> exact count
    n: int
    phi: float
    frequent: frozenset

    def freq(self, item: int) -> int:
        return self.freqs.get(item, 0)


def exact_frequencies(stream: np.ndarray, phi: float) -> GroundTruth:
    values, counts = np.unique(np.asarray(stream), return_counts=True)
    n = int(counts.sum())
    freqs = dict(zip(values.tolist(), counts.tolist()))
    frequent = frozenset(x for x, f in freqs.items() if f > phi * n)
    return GroundTruth(freqs=freqs, n=n, phi=phi, frequent=frequent)


def dump_stream(path: Union[str, Path], stream: np.ndarray) -> None:
    np.asarray(stream, dtype="<u4").tofile(path)


def load_stream(path: Union[str, Path]) -> np.ndarray:
    return np.fromfile(path, dtype="<u4").astype(ITEM_DTYPE)
