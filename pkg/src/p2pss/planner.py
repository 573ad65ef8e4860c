"""Closed-form parameter planning for the gossip protocol.

Every quantity is evaluated in double precision with natural logarithms;
the formulas only involve ratios of logarithms, so the base cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, InfeasibleRounds

#: Expected per-round variance reduction of push-pull averaging when pairs
#: are drawn as "random permutation, then a random partner": E[2^-psi].
CONVERGENCE_FACTOR = 1.0 / (2.0 * math.sqrt(math.e))


class Strategy(str, Enum):
    TIME_DOMINANT = "time-dominant"
    SPACE_DOMINANT = "space-dominant"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class PlanInputs:
    phi: float
    eps: float
    delta: float = 0.05
    p_star: int = 10_000
    conv_factor: float = CONVERGENCE_FACTOR

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.eps < self.phi < 1:
            raise ConfigError(f"need 0 < eps < phi < 1, got eps={self.eps}, phi={self.phi}")
        if self.p_star < 2:
            raise ConfigError(f"p_star must be at least 2, got {self.p_star}")
        if not 0 < self.conv_factor < 1:
            raise ConfigError(f"conv_factor must lie in (0, 1), got {self.conv_factor}")


@dataclass(frozen=True)
class Plan:
    k: int
    R: int
    strategy: Strategy
    achieved: float

    def as_dict(self) -> dict:
        return {"strategy": self.strategy.value, "k": self.k, "R": self.R, "tolerance": self.achieved}


def epsilon_star(p_star: float, delta: float, conv_factor: float, r: int) -> float:
    """``p* * sqrt(C^r / delta)``; values >= 1 are legal but void the guarantees."""
    if r < 0:
        raise ValueError(f"round count must be non-negative, got {r}")
    return p_star * math.sqrt(conv_factor**r / delta)


def tolerance_from_eps_star(k: float, e: float, phi: float) -> float:
    return 4.0 * e * phi / (1.0 + e) ** 2 + (1.0 - e) / (k * (1.0 + e))


def tolerance(k: int, r: int, inputs: PlanInputs) -> float:
    """False-positive tolerance reached with ``k`` counters after ``r`` rounds."""
    e = epsilon_star(inputs.p_star, inputs.delta, inputs.conv_factor, r)
    return tolerance_from_eps_star(k, e, inputs.phi)


def _k_denominator(inputs: PlanInputs, R: int) -> tuple[float, float]:
    e = epsilon_star(inputs.p_star, inputs.delta, inputs.conv_factor, R)
    return e, inputs.eps * (1.0 + e) ** 2 - 4.0 * inputs.phi * e


def feasible(inputs: PlanInputs, R: int) -> bool:
    """Whether some finite ``k`` reaches ``inputs.eps`` in ``R`` rounds."""
    e, den = _k_denominator(inputs, R)
    return e < 1.0 and den > 0.0


def _k_real(inputs: PlanInputs, R: int) -> float:
    e, den = _k_denominator(inputs, R)
    if e >= 1.0 or den <= 0.0:
        raise InfeasibleRounds(
            f"R={R} rounds give eps*={e:.4g}; no finite k reaches eps={inputs.eps}"
        )
    return (1.0 - e * e) / den


def k_of_R(inputs: PlanInputs, R: int) -> int:
    """Smallest integer number of counters reaching ``inputs.eps`` in ``R`` rounds."""
    k = math.ceil(_k_real(inputs, R))
    # Guard the ceiling against rounding in the closed form.
    while tolerance(k, R, inputs) > inputs.eps:
        k += 1
    while k > 1 and tolerance(k - 1, R, inputs) <= inputs.eps:
        k -= 1
    return k


def r_min(inputs: PlanInputs) -> int:
    """Fewest rounds for which some finite ``k`` reaches the tolerance."""
    phi, eps = inputs.phi, inputs.eps
    root = (2.0 * phi - eps - 2.0 * math.sqrt(phi * phi - eps * phi)) / (eps * inputs.p_star)
    bound = (math.log(inputs.delta) + 2.0 * math.log(root)) / math.log(inputs.conv_factor)
    R = max(math.floor(bound) + 1, 0)
    # The closed form can land one off when the boundary falls within rounding.
    while not feasible(inputs, R):
        R += 1
    while R > 0 and feasible(inputs, R - 1):
        R -= 1
    return R


def time_dominant_plan(inputs: PlanInputs) -> Plan:
    R = r_min(inputs)
    k = k_of_R(inputs, R)
    return Plan(k, R, Strategy.TIME_DOMINANT, tolerance(k, R, inputs))


def space_dominant_plan(inputs: PlanInputs) -> Plan:
    phi, eps = inputs.phi, inputs.eps
    k = math.floor(1.0 / eps) + 1
    if k * eps <= 1.0:  # 1/eps rounded down onto an integer
        k += 1
    # (k(2phi - eps) - sqrt(4 phi k^2 (phi - eps) + 1)) / (1 + eps k), rationalized
    # so that it stays accurate when k * eps is barely above one.
    e = (k * eps - 1.0) / (k * (2.0 * phi - eps) + math.sqrt(4.0 * phi * k * k * (phi - eps) + 1.0))
    bound = (2.0 * math.log(e) - 2.0 * math.log(inputs.p_star) + math.log(inputs.delta)) / math.log(
        inputs.conv_factor
    )
    R = max(math.floor(bound) + 1, 0)
    while tolerance(k, R, inputs) > eps:
        R += 1
    while R > 0 and tolerance(k, R - 1, inputs) <= eps:
        R -= 1
    return Plan(k, R, Strategy.SPACE_DOMINANT, tolerance(k, R, inputs))


def explicit_plan(inputs: PlanInputs, k: int, R: int) -> Plan:
    return Plan(k, R, Strategy.EXPLICIT, tolerance(k, R, inputs))


def gossip_deviation_bound(sigma0_sq: float, p: int, delta: float, conv_factor: float, r: int) -> float:
    """Max deviation from the mean that averaging gossip respects w.p. 1 - delta."""
    if sigma0_sq < 0:
        raise ValueError("sigma0_sq must be non-negative")
    return math.sqrt((p - 1) * sigma0_sq) * math.sqrt(conv_factor**r / delta)
