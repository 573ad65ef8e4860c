"""Peer availability models: fail-stop and the Yao on/off model.

Durations are measured in gossip rounds and rounded up to at least one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

ONLINE, OFFLINE, DEAD = 0, 1, 2


@dataclass(frozen=True)
class ShiftedPareto:
    """Pareto type II: ``F(x) = 1 - (1 + (x - mu)/beta)^-alpha`` for ``x >= mu``."""

    mu: float
    beta: float
    alpha: float

    def __post_init__(self):
        if self.beta <= 0 or self.alpha <= 0:
            raise ValueError(f"beta and alpha must be positive: {self}")

    def cdf(self, x):
        z = np.maximum(np.asarray(x, dtype=float) - self.mu, 0.0)
        return 1.0 - (1.0 + z / self.beta) ** (-self.alpha)

    def inverse_cdf(self, u):
        return self.mu + self.beta * ((1.0 - np.asarray(u, dtype=float)) ** (-1.0 / self.alpha) - 1.0)

    @property
    def mean(self) -> float:
        if self.alpha <= 1:
            return math.inf
        return self.mu + self.beta / (self.alpha - 1.0)


def sample_shifted_pareto(dist: ShiftedPareto, rng: np.random.Generator, size=None):
    return dist.inverse_cdf(rng.random(size))


# Per-peer mean lifetime l_i and mean offline time d_i.
LIFETIME_MEAN = ShiftedPareto(mu=1.01, beta=1.0, alpha=3.0)
OFFLINE_MEAN = ShiftedPareto(mu=1.01, beta=2.0, alpha=3.0)
# Parameters of the per-peer duration laws F_i (lifetimes) and G_i (offline).
F_PARETO_BETA = 2.0
G_PARETO_BETA = 3.0
DURATION_MU = 1.01


@dataclass(frozen=True)
class NoChurn:
    pass


@dataclass(frozen=True)
class FailStop:
    fail_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.fail_prob <= 1.0:
            raise ValueError(f"fail_prob must lie in [0, 1], got {self.fail_prob}")


@dataclass(frozen=True)
class Yao:
    lifetime: str = "pareto"  # or "exponential"

    def __post_init__(self):
        if self.lifetime not in ("pareto", "exponential"):
            raise ValueError(f"unknown lifetime law {self.lifetime!r}")


ChurnModel = Union[NoChurn, FailStop, Yao]


@dataclass
class ChurnState:
    model: ChurnModel
    status: np.ndarray  # int8 per peer: ONLINE / OFFLINE / DEAD
    next_flip: Optional[np.ndarray] = None  # Yao: round at which the status flips
    life_mean: Optional[np.ndarray] = None  # Yao: l_i
    off_mean: Optional[np.ndarray] = None  # Yao: d_i
    round: int = 0

    @property
    def online_mask(self) -> np.ndarray:
        return self.status == ONLINE

    def online(self) -> np.ndarray:
        return np.flatnonzero(self.status == ONLINE)

    def alive(self) -> np.ndarray:
        return np.flatnonzero(self.status != DEAD)


def _durations(rng: np.random.Generator, n: int, alpha, beta, exp_mean=None) -> np.ndarray:
    u = rng.random(n)
    if exp_mean is not None:
        x = -np.log1p(-u) * exp_mean
    else:
        x = DURATION_MU + beta * ((1.0 - u) ** (-1.0 / alpha) - 1.0)
    return np.maximum(np.ceil(x), 1).astype(np.int64)


def _lifetimes(state: ChurnState, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    l = state.life_mean[idx]
    if state.model.lifetime == "exponential":
        return _durations(rng, len(idx), None, None, exp_mean=l)
    return _durations(rng, len(idx), 2.0 * l, F_PARETO_BETA)


def _offline_times(state: ChurnState, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return _durations(rng, len(idx), 2.0 * state.off_mean[idx], G_PARETO_BETA)


def init_churn(model: ChurnModel, p: int, rng: np.random.Generator) -> ChurnState:
    """All peers start online; Yao peers draw their first lifetime."""
    if p < 1:
        raise ValueError(f"need at least one peer, got {p}")
    state = ChurnState(model=model, status=np.full(p, ONLINE, dtype=np.int8))
    if isinstance(model, Yao):
        state.life_mean = sample_shifted_pareto(LIFETIME_MEAN, rng, p)
        state.off_mean = sample_shifted_pareto(OFFLINE_MEAN, rng, p)
        everyone = np.arange(p)
        # Online for rounds 1..d, flips at the start of round d + 1.
        state.next_flip = _lifetimes(state, everyone, rng) + 1
    return state


def step_churn(state: ChurnState, round: int, rng: np.random.Generator) -> np.ndarray:
    """Advance availability to ``round`` and return the online peer indices."""
    state.round = round
    model = state.model
    if isinstance(model, FailStop):
        u = rng.random(len(state.status))
        state.status[(state.status == ONLINE) & (u < model.fail_prob)] = DEAD
    elif isinstance(model, Yao):
        due = np.flatnonzero(state.next_flip <= round)
        if len(due):
            going_up = due[state.status[due] == OFFLINE]
            going_down = due[state.status[due] == ONLINE]
            state.status[going_up] = ONLINE
            state.status[going_down] = OFFLINE
            state.next_flip[going_up] = round + _lifetimes(state, going_up, rng)
            state.next_flip[going_down] = round + _offline_times(state, going_down, rng)
    return state.online()
