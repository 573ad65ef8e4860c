"""Recall, precision, average relative error, and their aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .planner import Plan
from .protocol import FrequentReport
from .workload import GroundTruth

#: Two-sided 95% normal quantile.
Z95 = 1.96


@dataclass(frozen=True)
class RunMetrics:
    recall: float
    precision: float
    are: float

    @classmethod
    def undefined(cls) -> "RunMetrics":
        return cls(math.nan, math.nan, math.nan)

    def is_defined(self) -> bool:
        return not (math.isnan(self.recall) or math.isnan(self.precision) or math.isnan(self.are))


def score(report: FrequentReport, truth: GroundTruth) -> RunMetrics:
    """Recall and precision against the exact frequent set, ARE over reported items."""
    reported = report.items
    hits = len(reported & truth.frequent)
    recall = hits / len(truth.frequent) if truth.frequent else 1.0
    precision = hits / len(reported) if reported else 1.0
    errors = []
    for item, f_est in report.entries.items():
        f = truth.freqs.get(item, 0)
        # Summaries only ever hold items that occur somewhere in the stream.
        assert f > 0, f"reported item {item} never occurs in the stream"
        errors.append(abs(f_est - f) / f)
    are = float(np.mean(errors)) if errors else 0.0
    return RunMetrics(recall=recall, precision=precision, are=are)


@dataclass(frozen=True)
class Aggregate:
    mean: float
    ci_halfwidth: float
    count: int = 0


def mean_ci(values: Iterable[float]) -> Aggregate:
    """Mean and 95% normal-approximation half-width; NaNs are skipped."""
    x = np.asarray([v for v in values if not math.isnan(v)], dtype=np.float64)
    if len(x) == 0:
        return Aggregate(math.nan, math.nan, 0)
    if np.all(x == x[0]):
        return Aggregate(float(x[0]), 0.0, len(x))
    half = Z95 * float(np.std(x, ddof=1)) / math.sqrt(len(x))
    return Aggregate(float(x.mean()), half, len(x))


def aggregate(runs: Sequence[RunMetrics]) -> dict:
    """Per-metric :class:`Aggregate` over the runs with defined metrics."""
    if not runs:
        raise ValueError("need at least one run")
    ok = [r for r in runs if r.is_defined()]
    return {
        "recall": mean_ci(r.recall for r in ok),
        "precision": mean_ci(r.precision for r in ok),
        "are": mean_ci(r.are for r in ok),
    }


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of checking one report against the accuracy guarantees."""

    sandwich: dict = field(default_factory=dict)  # item -> bool
    floor_violations: tuple = ()  # reported items with f <= (phi - eps) n
    floor: float = 0.0

    @property
    def sandwich_ok(self) -> bool:
        return all(self.sandwich.values())

    @property
    def floor_ok(self) -> bool:
        return not self.floor_violations

    @property
    def passed(self) -> bool:
        return self.sandwich_ok and self.floor_ok


def bound_check(report: FrequentReport, truth: GroundTruth, plan: Plan) -> BoundCheck:
    """Check every reported estimate against its envelope and the false-positive floor.

    The envelope is ``(1-e)/(1+e) f <= f^s <= (1+e)/(1-e) (f + n/k)`` with
    ``e = report.eps_star``; both ends are inclusive so that the exact
    ``e = 0`` case, where ``f^s = f`` is attainable, passes. ``plan.achieved``
    is the tolerance whose floor ``(phi - eps) n`` no reported item may reach.
    """
    e = report.eps_star
    if e >= 1.0:
        raise ValueError(f"eps* = {e} >= 1 carries no guarantee")
    lo_factor = (1.0 - e) / (1.0 + e)
    hi_factor = (1.0 + e) / (1.0 - e)
    n, k = truth.n, plan.k
    # Relative slack for the floating-point sums accumulated by gossip.
    slack = 1e-9
    sandwich = {}
    for item, f_est in report.entries.items():
        f = truth.freqs.get(item, 0)
        lo = lo_factor * f
        hi = hi_factor * (f + n / k)
        sandwich[item] = lo * (1 - slack) <= f_est <= hi * (1 + slack)
    floor = (truth.phi - plan.achieved) * n
    bad = tuple(sorted(x for x in report.entries if truth.freqs.get(x, 0) <= floor))
    return BoundCheck(sandwich=sandwich, floor_violations=bad, floor=floor)
