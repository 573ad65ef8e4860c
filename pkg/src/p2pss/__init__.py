"""Gossip-based detection of frequent items over unstructured P2P networks."""

from .config import ExperimentConfig
from .engine import run_round, run_simulation
from .errors import (
    ConfigError,
    ConnectivityFailure,
    DegenerateEstimate,
    InfeasibleRounds,
    InsufficientRounds,
    IsolatedPeer,
    P2PSSError,
)
from .metrics import aggregate, bound_check, score
from .planner import PlanInputs, k_of_R, r_min, space_dominant_plan, time_dominant_plan, tolerance
from .protocol import FrequentReport, PeerState, gossip_update, init_peer, query
from .sketch import StreamSummary, merge, prune, scale

__version__ = "0.1.0"
