"""Repetitions, parameter sweeps and CSV rows on top of the engine."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, TextIO

from .config import SWEEP_FIELDS, ExperimentConfig
from .engine import population, run_simulation
from .errors import ConfigError, DegenerateEstimate, InsufficientRounds
from .metrics import RunMetrics, aggregate, score
from .planner import epsilon_star
from .protocol import FrequentReport, PeerState, query
from .topology import ALL
from .workload import GroundTruth

log = logging.getLogger(__name__)

CSV_HEADER = (
    "run_id",
    "seed",
    "peer_id",
    "param_name",
    "param_value",
    "recall",
    "precision",
    "are",
    "eps_star",
    "p_est",
    "rounds",
    "k",
    "online_peers",
)
TRACE_HEADER = ("seed", "param_name", "param_value", "round", "sum_n", "sum_q", "var_n", "online")


@dataclass(frozen=True)
class PeerResult:
    run_id: int
    seed: int
    peer_id: int
    param_name: str
    param_value: str
    metrics: RunMetrics
    report: Optional[FrequentReport]
    rounds: int
    k: int
    online_peers: int

    def row(self) -> tuple:
        r = self.report
        return (
            self.run_id,
            self.seed,
            self.peer_id,
            self.param_name,
            self.param_value,
            self.metrics.recall,
            self.metrics.precision,
            self.metrics.are,
            r.eps_star if r else math.nan,
            r.p_est if r else math.nan,
            self.rounds,
            self.k,
            self.online_peers,
        )


@dataclass
class ExperimentResult:
    peers: list  # PeerResult, ordered by (value, repetition, peer)
    aggregates: dict  # (param_name, param_value) -> {metric: Aggregate}
    traces: list  # (seed, param_name, param_value, RoundTrace)

    def rows(self) -> list:
        out = [pr.row() for pr in self.peers]
        for (name, value), agg in self.aggregates.items():
            out.extend(aggregate_rows(name, value, agg, [pr for pr in self.peers if pr.param_value == value]))
        return out


def aggregate_rows(name: str, value: str, agg: dict, peers: Sequence[PeerResult]) -> list:
    """A ``mean`` row and a ``ci95`` half-width row for one parameter value."""
    defined = [pr for pr in peers if pr.report is not None]

    def avg(xs):
        xs = list(xs)
        return sum(xs) / len(xs) if xs else math.nan

    eps = avg(pr.report.eps_star for pr in defined)
    p_est = avg(pr.report.p_est for pr in defined)
    rounds = peers[0].rounds if peers else 0
    k = peers[0].k if peers else 0
    online = avg(pr.online_peers for pr in peers)
    mean = ("mean", "", "all", name, value, agg["recall"].mean, agg["precision"].mean, agg["are"].mean)
    ci = ("ci95", "", "all", name, value, agg["recall"].ci_halfwidth, agg["precision"].ci_halfwidth, agg["are"].ci_halfwidth)
    return [mean + (eps, p_est, rounds, k, online), ci + ("", "", rounds, k, online)]


@lru_cache(maxsize=32)
def _truth(config_key: tuple, seed: int, phi: float) -> GroundTruth:
    config = ExperimentConfig(**dict(config_key))
    _, _, freqs = population(config, seed)
    frequent = frozenset(x for x, f in freqs.items() if f > phi * config.n)
    return GroundTruth(freqs=freqs, n=config.n, phi=phi, frequent=frequent)


def ground_truth(config: ExperimentConfig, seed: int, phi: Optional[float] = None) -> GroundTruth:
    key = (("n", config.n), ("m", config.m), ("rho", config.rho), ("p", config.p), ("k", config.k),
           ("partition", config.partition))
    return _truth(key, seed, config.phi if phi is None else phi)


def check_feasible(config: ExperimentConfig, rounds: Optional[int] = None) -> None:
    """Raise :class:`InsufficientRounds` when the bound threshold is void."""
    if config.threshold != "bound":
        return
    r = config.R if rounds is None else rounds
    e = epsilon_star(config.effective_p_star, config.delta, config.conv_factor, r)
    if e >= 1.0:
        raise InsufficientRounds(
            f"eps* = {e:.4g} >= 1 after R={r} rounds with p*={config.effective_p_star}; "
            "use more rounds or threshold=ideal"
        )


def query_state(state: PeerState, config: ExperimentConfig, phi: Optional[float] = None) -> Optional[FrequentReport]:
    """Report for one peer, or None when its peer-count estimate is undefined."""
    try:
        return query(
            state,
            config.phi if phi is None else phi,
            config.delta,
            config.effective_p_star,
            config.conv_factor,
            eps_star=0.0 if config.threshold == "ideal" else None,
        )
    except DegenerateEstimate:
        return None


def evaluate(
    states: Sequence[PeerState],
    online: Sequence[int],
    config: ExperimentConfig,
    *,
    run_id: int,
    seed: int,
    rounds: int,
    param_name: str = "",
    param_value: str = "",
    phi: Optional[float] = None,
) -> list:
    truth = ground_truth(config, seed, phi)
    peers = [config.query_peer] if config.query_peer is not None else sorted(int(l) for l in online)
    out = []
    for l in peers:
        report = query_state(states[l], config, phi)
        metrics = score(report, truth) if report is not None else RunMetrics.undefined()
        out.append(
            PeerResult(run_id, seed, l, param_name, param_value, metrics, report, rounds, config.k, len(online))
        )
    if all(pr.report is None for pr in out):
        log.warning("seed %d: every queried peer has q~ = 0 (the seed peer never spread its mass)", seed)
    return out


def _format_value(value) -> str:
    return ALL if value == ALL else str(value)


def _run_one(args) -> tuple:
    """One repetition of a sweep: returns its PeerResults and traces."""
    config, run_id, seed, name, values = args
    peers, traces = [], []
    if name == "rounds":
        res = run_simulation(config.replace(R=max(values)), seed=seed, checkpoints=values)
        for v in values:
            peers += evaluate(res.snapshots[v], res.online[v], config.replace(R=v), run_id=run_id, seed=seed,
                              rounds=v, param_name=name, param_value=_format_value(v))
        traces += [(seed, name, "", t) for t in res.traces]
    elif name == "phi":
        res = run_simulation(config, seed=seed)
        for v in values:
            peers += evaluate(res.states, res.world.churn.online(), config.replace(phi=v), run_id=run_id,
                              seed=seed, rounds=config.R, param_name=name, param_value=_format_value(v), phi=v)
        traces += [(seed, name, "", t) for t in res.traces]
    else:
        for v in values:
            cfg = sweep_config(config, name, v) if name else config
            res = run_simulation(cfg, seed=seed)
            label = _format_value(v) if name else ""
            peers += evaluate(res.states, res.world.churn.online(), cfg, run_id=run_id, seed=seed, rounds=cfg.R,
                              param_name=name, param_value=label)
            traces += [(seed, name, label, t) for t in res.traces]
    return peers, traces


def sweep_config(config: ExperimentConfig, name: str, value) -> ExperimentConfig:
    if name not in SWEEP_FIELDS:
        raise ConfigError(f"unknown sweep parameter {name!r}; choose from {sorted(SWEEP_FIELDS)}")
    changes = {SWEEP_FIELDS[name]: value}
    if name == "fail_prob" and config.churn != "yao":
        changes["churn"] = "failstop"
    return config.replace(**changes)


def run_sweep(
    config: ExperimentConfig,
    name: str = "",
    values: Sequence = (None,),
    workers: int = 1,
) -> ExperimentResult:
    """Run ``config.repetitions`` repetitions for every value of ``name``.

    Repetition ``i`` uses seed ``config.seed + i`` for every value, so values
    are compared on identical streams, graphs and gossip schedules. With an
    empty ``name`` this is a plain run.
    """
    values = list(values)
    if name:
        cfgs = [sweep_config(config, name, v) for v in values]
        for cfg, v in zip(cfgs, values):
            cfg.validate()
            check_feasible(cfg, v if name == "rounds" else None)
    else:
        check_feasible(config)
    jobs = [(config, i, config.seed + i, name, values) for i in range(config.repetitions)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    peers = [pr for rep, _ in results for pr in rep]
    traces = [t for _, tr in results for t in tr]
    labels = [_format_value(v) for v in values] if name else [""]
    # Rows grouped by parameter value, then repetition, then peer.
    order = {label: i for i, label in enumerate(labels)}
    peers.sort(key=lambda pr: (order[pr.param_value], pr.run_id, pr.peer_id))
    aggregates = {}
    for label in labels:
        block = [pr.metrics for pr in peers if pr.param_value == label]
        aggregates[(name, label)] = aggregate(block)
    return ExperimentResult(peers=peers, aggregates=aggregates, traces=traces)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    return run_sweep(config, "", (None,), workers=workers)


def _cell(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def write_csv(result: ExperimentResult, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows():
        writer.writerow([_cell(v) for v in row])


def write_traces(result: ExperimentResult, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for seed, name, value, t in result.traces:
        writer.writerow([seed, name, value, t.round, _cell(t.sum_n), _cell(t.sum_q), _cell(t.var_n), t.online])


def csv_text(result: ExperimentResult) -> str:
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()


def summary_lines(result: ExperimentResult) -> list:
    lines = []
    for (name, value), agg in result.aggregates.items():
        head = f"{name}={value}: " if name else ""
        parts = [f"{m} {a.mean:.6g} +/- {a.ci_halfwidth:.2g}" for m, a in agg.items()]
        lines.append(head + ", ".join(parts))
    return lines
