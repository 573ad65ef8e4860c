"""Experiment configuration and its flat ``key=value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Union

from .churn import FailStop, NoChurn, Yao
from .errors import ConfigError
from .planner import CONVERGENCE_FACTOR
from .topology import ALL, BA, ER
from .workload import Adversarial, Contiguous, RoundRobin, Shuffled

FULL_SCALE_N = 200_000_000

# Standard one-parameter sweep grids.
DEFAULT_SWEEPS = {
    "rho": [0.9, 1.1, 1.3, 1.5],
    "phi": [0.01, 0.02, 0.03, 0.04],
    "peers": [1000, 5000, 10000, 15000, 20000],
    "k": [1000, 1800, 2600, 3400],
    "rounds": [20, 22, 24, 26, 28],
    "fanout": [1, 2, 3, ALL],
    "fail_prob": [0.0, 0.01, 0.05, 0.1],
}

# Sweep parameter name -> config field.
SWEEP_FIELDS = {
    "rho": "rho",
    "phi": "phi",
    "peers": "p",
    "k": "k",
    "rounds": "R",
    "fanout": "fo",
    "fail_prob": "fail_prob",
}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 2_000_000
    m: int = 1_000_000
    rho: float = 1.2
    p: int = 10_000
    k: int = 2200
    R: int = 24
    fo: Union[int, str] = 1
    phi: float = 0.02
    delta: float = 0.05
    p_star: Optional[int] = None  # None: use p
    conv_factor: float = CONVERGENCE_FACTOR
    topology: str = "ba"  # "ba" | "er"
    ba_attach: int = 20
    er_prob: Optional[float] = None  # None: see topology.ER
    churn: str = "none"  # "none" | "failstop" | "yao"
    fail_prob: float = 0.0
    yao_lifetime: str = "pareto"
    contact: str = "online"  # fan-out among "online" or "any" neighbours
    partition: str = "contiguous"  # "contiguous" | "roundrobin" | "shuffled" | "adversarial"
    threshold: str = "bound"  # "bound": eps* from the round count; "ideal": eps* = 0
    repetitions: int = 1
    seed: int = 0
    ghost: bool = False
    query_peer: Optional[int] = None

    def __post_init__(self):
        self.validate()

    @property
    def effective_p_star(self) -> int:
        return self.p if self.p_star is None else self.p_star

    def validate(self) -> None:
        def need(ok: bool, msg: str):
            if not ok:
                raise ConfigError(msg)

        need(self.n >= 1, f"n must be positive, got {self.n}")
        need(self.m >= 1, f"m must be positive, got {self.m}")
        need(self.rho > 0, f"rho must be positive, got {self.rho}")
        need(self.p >= 2, f"p must be at least 2, got {self.p}")
        need(self.k >= 1, f"k must be positive, got {self.k}")
        need(self.R >= 0, f"R must be non-negative, got {self.R}")
        need(self.fo == ALL or (isinstance(self.fo, int) and self.fo >= 1), f"fo must be >= 1 or ALL, got {self.fo!r}")
        need(0 < self.phi < 1, f"phi must lie in (0, 1), got {self.phi}")
        need(0 < self.delta < 1, f"delta must lie in (0, 1), got {self.delta}")
        need(self.effective_p_star >= self.p, f"p_star must be >= p, got {self.p_star}")
        need(self.topology in ("ba", "er"), f"unknown topology {self.topology!r}")
        need(self.churn in ("none", "failstop", "yao"), f"unknown churn model {self.churn!r}")
        need(0.0 <= self.fail_prob <= 1.0, f"fail_prob must lie in [0, 1], got {self.fail_prob}")
        need(self.yao_lifetime in ("pareto", "exponential"), f"unknown Yao lifetime {self.yao_lifetime!r}")
        need(
            self.partition in ("contiguous", "roundrobin", "shuffled", "adversarial"),
            f"unknown partition scheme {self.partition!r}",
        )
        need(self.contact in ("online", "any"), f"unknown contact mode {self.contact!r}")
        need(self.threshold in ("bound", "ideal"), f"unknown threshold mode {self.threshold!r}")
        need(self.repetitions >= 1, f"repetitions must be positive, got {self.repetitions}")
        need(
            self.query_peer is None or 0 <= self.query_peer < self.p,
            f"query_peer out of range: {self.query_peer}",
        )

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def topology_model(self):
        # Small worlds cannot host the default attach count; cap it at p - 1.
        return BA(min(self.ba_attach, self.p - 1)) if self.topology == "ba" else ER(self.er_prob)

    def churn_model(self):
        if self.churn == "failstop":
            return FailStop(self.fail_prob)
        if self.churn == "yao":
            return Yao(self.yao_lifetime)
        return NoChurn()

    def partition_scheme(self, seed: int):
        return {
            "contiguous": Contiguous(),
            "roundrobin": RoundRobin(),
            "shuffled": Shuffled(seed),
            "adversarial": Adversarial(),
        }[self.partition]

    @classmethod
    def from_mapping(cls, values: dict, base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        """Build from string (or typed) values, overriding ``base``."""
        base = base or cls()
        known = {f.name: f for f in fields(cls)}
        changes = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            changes[key] = parse_value(key, raw)
        # Selecting fail-stop implicitly when only a failure probability is given.
        if changes.get("fail_prob") and "churn" not in changes and base.churn == "none":
            changes["churn"] = "failstop"
        try:
            return dataclasses.replace(base, **changes)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: Union[str, Path], base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        return cls.from_mapping(read_kv_file(path), base)


_INT_KEYS = {"n", "m", "p", "k", "R", "ba_attach", "repetitions", "seed"}
_FLOAT_KEYS = {"rho", "phi", "delta", "conv_factor", "fail_prob"}
_OPT_INT_KEYS = {"p_star", "query_peer"}
_OPT_FLOAT_KEYS = {"er_prob"}


def _number(text: str) -> float:
    return float(text.replace("_", ""))


def _int(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def parse_value(key: str, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if key in _INT_KEYS:
            return _int(text)
        if key in _FLOAT_KEYS:
            return _number(text)
        if key in _OPT_INT_KEYS:
            return None if text.lower() in ("", "none") else _int(text)
        if key in _OPT_FLOAT_KEYS:
            return None if text.lower() in ("", "none") else _number(text)
        if key == "fo":
            return ALL if text.upper() == ALL else _int(text)
        if key == "ghost":
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"expected a boolean for ghost, got {text!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return text.lower()


def read_kv_file(path: Union[str, Path]) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values
