"""Per-peer state machine of the gossip protocol: init, pairwise update, query."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import DegenerateEstimate, InsufficientRounds
from .planner import CONVERGENCE_FACTOR, epsilon_star
from .sketch import StreamSummary, merge, scale

#: The one peer that starts with q~ = 1; every other peer starts at 0.
SEED_PEER = 0


@dataclass(frozen=True)
class PeerState:
    """Gossip state of one peer.

    ``n_avg_est`` tracks the average local stream length n/p and ``q_est``
    tracks 1/p; both are driven by the same pairwise averaging that moves
    the summary.
    """

    peer_id: int
    summary: StreamSummary
    n_avg_est: float
    q_est: float
    round: int = 0


@dataclass(frozen=True)
class FrequentReport:
    entries: dict  # item -> estimated global frequency
    threshold_used: float
    eps_star: float
    p_est: float

    @property
    def items(self) -> frozenset:
        return frozenset(self.entries)


def init_peer(peer_id: int, local_stream: Iterable[int], k: int) -> PeerState:
    items = local_stream.tolist() if hasattr(local_stream, "tolist") else list(local_stream)
    summary = StreamSummary.from_stream(items, k)
    return PeerState(
        peer_id=peer_id,
        summary=summary,
        n_avg_est=float(len(items)),
        q_est=1.0 if peer_id == SEED_PEER else 0.0,
    )


def gossip_update(state_i: PeerState, state_j: PeerState, k: int) -> PeerState:
    """Result of one push-pull exchange; both participants adopt it.

    The summaries are merged without scaling and halved once afterwards.
    """
    return PeerState(
        peer_id=state_i.peer_id,
        summary=scale(merge(state_i.summary, state_j.summary, k), 2.0),
        n_avg_est=(state_i.n_avg_est + state_j.n_avg_est) / 2.0,
        q_est=(state_i.q_est + state_j.q_est) / 2.0,
        round=state_i.round,
    )


def estimate_peers(state: PeerState) -> float:
    if state.q_est <= 0.0:
        raise DegenerateEstimate(f"peer {state.peer_id} has q~ = 0; no averaging mass reached it")
    return 1.0 / state.q_est


def query(
    state: PeerState,
    phi: float,
    delta: float,
    p_star: float,
    conv_factor: float = CONVERGENCE_FACTOR,
    eps_star: Optional[float] = None,
) -> FrequentReport:
    """Report the candidate frequent items held by ``state``.

    An item is reported when its summary frequency exceeds
    ``phi * n~ * (1 - eps*) / (1 + eps*)``; its global frequency estimate is
    the summary frequency times the peer-count estimate. Passing
    ``eps_star=0.0`` gives the idealized fully-converged threshold.
    """
    if eps_star is None:
        eps_star = epsilon_star(p_star, delta, conv_factor, state.round)
    if eps_star >= 1.0:
        raise InsufficientRounds(
            f"eps* = {eps_star:.4g} >= 1 after {state.round} rounds; the threshold carries no guarantee"
        )
    p_est = estimate_peers(state)
    t = phi * state.n_avg_est * (1.0 - eps_star) / (1.0 + eps_star)
    keys, vals = state.summary.arrays()
    hit = vals > t
    entries = dict(zip(keys[hit].tolist(), (vals[hit] * p_est).tolist()))
    return FrequentReport(entries=entries, threshold_used=t, eps_star=eps_star, p_est=p_est)
