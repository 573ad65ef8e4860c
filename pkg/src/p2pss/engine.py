"""Round-based simulation of the gossip protocol, plus two oracles.

Within a round, churn is applied first; then every online peer, visited in
a random permutation, performs its push-pull exchanges one after the other
with neighbours drawn among the online ones (or among all neighbours when
``contact="any"``).
Each exchange is atomic: both participants adopt the output of
:func:`~p2pss.protocol.gossip_update` before any other exchange starts, so
no two concurrent pairs ever share a peer. An exchange whose partner is
offline or dead is cancelled and the initiator keeps its state.

The oracles are a centralized replay of the same pairwise merges on a plain
vector of summaries, and a "ghost" matrix holding the exact per-peer
frequency vectors that the summaries implicitly describe.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .churn import ChurnState, NoChurn, init_churn, step_churn
from .config import ExperimentConfig
from .errors import IsolatedPeer
from .protocol import PeerState, gossip_update, init_peer
from .sketch import StreamSummary, merge, scale
from .topology import Topology, build_topology, sample_fanout
from .workload import StreamSpec, gen_zipf, partition

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoundTrace:
    round: int
    sum_n: float
    sum_q: float
    var_n: float
    online: int


class Ghost:
    """Exact per-peer frequency vectors, averaged alongside the summaries."""

    def __init__(self, local_streams: Sequence[np.ndarray]):
        flat = np.concatenate([np.asarray(s, dtype=np.int64) for s in local_streams])
        self.items = np.unique(flat)
        self.freqs = np.zeros((len(local_streams), len(self.items)))
        for l, s in enumerate(local_streams):
            cols = np.searchsorted(self.items, np.asarray(s, dtype=np.int64))
            self.freqs[l] = np.bincount(cols, minlength=len(self.items))
        self.lengths = np.array([len(s) for s in local_streams], dtype=np.float64)

    def step(self, i: int, j: int) -> None:
        if i == j:
            return
        avg = (self.freqs[i] + self.freqs[j]) / 2.0
        self.freqs[i] = avg
        self.freqs[j] = avg
        self.lengths[i] = self.lengths[j] = (self.lengths[i] + self.lengths[j]) / 2.0

    def lookup(self, peer: int, items: np.ndarray) -> np.ndarray:
        cols = np.searchsorted(self.items, items)
        cols = np.minimum(cols, len(self.items) - 1)
        found = self.items[cols] == items
        return np.where(found, self.freqs[peer, cols], 0.0)


def ghost_step(ghost: Ghost, pair: tuple) -> Ghost:
    ghost.step(*pair)
    return ghost


@dataclass
class World:
    states: list
    topology: Topology
    churn: ChurnState
    k: int
    fo: object
    rng: np.random.Generator
    churn_rng: np.random.Generator
    round: int = 0
    ghost: Optional[Ghost] = None
    events: Optional[list] = None
    contact: str = "online"  # fan-out drawn among "online" or "any" neighbours
    pair_log: list = field(default_factory=list)  # executed pairs, one list per round
    traces: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.states) != self.topology.peer_count:
            raise ValueError("one state per peer required")
        if not self.traces:
            self.traces.append(self.trace())

    @property
    def p(self) -> int:
        return self.topology.peer_count

    def pairs(self) -> list:
        return [pair for round_pairs in self.pair_log for pair in round_pairs]

    def trace(self) -> RoundTrace:
        alive = self.churn.alive()
        n_est = np.array([self.states[l].n_avg_est for l in alive])
        q_est = np.array([self.states[l].q_est for l in alive])
        var = float(np.var(n_est, ddof=1)) if len(n_est) > 1 else 0.0
        return RoundTrace(
            round=self.round,
            sum_n=float(n_est.sum()),
            sum_q=float(q_est.sum()),
            var_n=var,
            online=len(self.churn.online()),
        )


def new_world(
    states: Sequence[PeerState],
    topology: Topology,
    k: int,
    fo=1,
    seed: int = 0,
    churn=NoChurn(),
    ghost: Optional[Ghost] = None,
    record_events: bool = False,
    contact: str = "online",
) -> World:
    if contact not in ("online", "any"):
        raise ValueError(f"contact must be 'online' or 'any', got {contact!r}")
    gossip_seq, churn_seq = np.random.SeedSequence(seed).spawn(2)
    churn_rng = np.random.default_rng(churn_seq)
    churn_state = churn if isinstance(churn, ChurnState) else init_churn(churn, topology.peer_count, churn_rng)
    return World(
        states=list(states),
        topology=topology,
        churn=churn_state,
        k=k,
        fo=fo,
        rng=np.random.default_rng(gossip_seq),
        churn_rng=churn_rng,
        ghost=ghost,
        events=[] if record_events else None,
        contact=contact,
    )


def run_round(world: World) -> World:
    world.round += 1
    r = world.round
    online = step_churn(world.churn, r, world.churn_rng)
    online_mask = world.churn.online_mask
    states, k, events, ghost = world.states, world.k, world.events, world.ghost
    executed = []
    pool = online_mask if world.contact == "online" else None
    for i in world.rng.permutation(online).tolist():
        try:
            partners = sample_fanout(world.topology, i, world.fo, world.rng, pool)
        except IsolatedPeer:
            continue
        for j in partners:
            if not online_mask[j]:
                if events is not None:
                    events.append(("cancel", r, i, j))
                continue
            if events is not None:
                events.append(("begin", r, i, j))
            merged = gossip_update(states[i], states[j], k)
            states[i] = replace(merged, peer_id=i)
            states[j] = replace(merged, peer_id=j)
            if ghost is not None:
                ghost.step(i, j)
            executed.append((i, j))
            if events is not None:
                events.append(("end", r, i, j))
    for l in world.churn.alive().tolist():
        states[l] = replace(states[l], round=r)
    world.pair_log.append(executed)
    world.traces.append(world.trace())
    return world


def sandwich_violations(world: World, peers: Optional[Iterable[int]] = None) -> list:
    """Stored items breaking ``ghost <= estimate <= ghost + n~/k``."""
    if world.ghost is None:
        raise ValueError("ghost tracking is disabled for this world")
    bad = []
    for l in range(world.p) if peers is None else peers:
        state = world.states[l]
        keys, vals = state.summary.arrays()
        exact = world.ghost.lookup(l, keys)
        upper = exact + state.n_avg_est / world.k
        for idx in np.flatnonzero((exact > vals) | (vals > upper)).tolist():
            bad.append((world.round, l, int(keys[idx]), float(exact[idx]), float(vals[idx]), float(upper[idx])))
    return bad


def avg_merge_oracle(summaries: Sequence[StreamSummary], k: int, pair_sequence: Iterable[tuple]) -> list:
    """Centralized replay: for each pair, both entries become merge-then-halve."""
    out = list(summaries)
    for i, j in pair_sequence:
        out[i] = out[j] = scale(merge(out[i], out[j], k), 2.0)
    return out


def avg_oracle(values: Sequence[float], pair_sequence: Iterable[tuple]) -> np.ndarray:
    """Scalar averaging replay on the same pair sequence."""
    w = np.array(values, dtype=np.float64)
    for i, j in pair_sequence:
        w[i] = w[j] = (w[i] + w[j]) / 2.0
    return w


# -- full experiment runs -------------------------------------------------


def _seeds(seed: int) -> dict:
    names = ("data", "partition", "topology", "engine")
    ints = np.random.SeedSequence(seed).generate_state(len(names))
    return {name: int(v) for name, v in zip(names, ints)}


@lru_cache(maxsize=4)
def _population(n: int, m: int, rho: float, p: int, k: int, partition_name: str, seed: int):
    # Stream generation and the local Space-Saving pass dominate small runs;
    # cached so that sweeps over gossip-only parameters reuse them.
    from .config import ExperimentConfig as _Cfg

    seeds = _seeds(seed)
    stream = gen_zipf(StreamSpec(n=n, m=m, rho=rho, seed=seeds["data"]))
    scheme = _Cfg(p=p, partition=partition_name).partition_scheme(seeds["partition"])
    local = partition(stream, p, scheme)
    states = tuple(init_peer(l, local[l], k) for l in range(p))
    values, counts = np.unique(stream, return_counts=True)
    freqs = dict(zip(values.tolist(), counts.tolist()))
    return states, tuple(local), freqs


def population(config: ExperimentConfig, seed: int):
    return _population(config.n, config.m, config.rho, config.p, config.k, config.partition, seed)


def build_world(config: ExperimentConfig, seed: int, record_events: bool = False) -> World:
    states, local, _ = population(config, seed)
    seeds = _seeds(seed)
    topology = build_topology(config.topology_model(), config.p, seeds["topology"])
    ghost = Ghost(local) if config.ghost else None
    return new_world(
        states,
        topology,
        config.k,
        fo=config.fo,
        seed=seeds["engine"],
        churn=config.churn_model(),
        ghost=ghost,
        record_events=record_events,
        contact=config.contact,
    )


@dataclass
class SimulationResult:
    seed: int
    world: World
    snapshots: dict  # round -> list of PeerState
    online: dict  # round -> online peer indices
    freqs: dict  # exact global item counts
    n: int
    sandwich: Optional[list] = None  # violations, when checked

    @property
    def states(self) -> list:
        return self.world.states

    @property
    def traces(self) -> list:
        return self.world.traces


def run_simulation(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    checkpoints: Iterable[int] = (),
    check_sandwich: bool = False,
    record_events: bool = False,
) -> SimulationResult:
    """Run ``config.R`` rounds; snapshot the states after each checkpoint round."""
    seed = config.seed if seed is None else seed
    world = build_world(config, seed, record_events=record_events)
    wanted = set(checkpoints)
    snapshots, online = {}, {}
    violations = [] if check_sandwich else None
    if check_sandwich:
        violations.extend(sandwich_violations(world))
    if 0 in wanted:
        snapshots[0], online[0] = list(world.states), world.churn.online()
    for _ in range(config.R):
        run_round(world)
        if check_sandwich:
            violations.extend(sandwich_violations(world))
        if world.round in wanted:
            snapshots[world.round], online[world.round] = list(world.states), world.churn.online()
    _, _, freqs = population(config, seed)
    log.debug("seed %d: %d rounds, %d exchanges", seed, config.R, len(world.pairs()))
    return SimulationResult(
        seed=seed,
        world=world,
        snapshots=snapshots,
        online=online,
        freqs=freqs,
        n=config.n,
        sandwich=violations,
    )
