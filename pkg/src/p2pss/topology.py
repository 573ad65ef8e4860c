"""Random overlay graphs and fan-out sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import networkx as nx
import numpy as np

from .errors import ConfigError, ConnectivityFailure, IsolatedPeer

ALL = "ALL"
MAX_REGENERATIONS = 100


# Random-neighbour averaging only approaches the uniform-gossip convergence
# factor once the mean degree is a few tens; sparser overlays mix slower.
DEFAULT_BA_ATTACH = 20
DEFAULT_ER_DEGREE = 40


@dataclass(frozen=True)
class BA:
    """Barabasi-Albert preferential attachment; each new node brings ``attach`` edges."""

    attach: int = DEFAULT_BA_ATTACH


@dataclass(frozen=True)
class ER:
    """Erdos-Renyi G(p, q).

    ``edge_prob=None`` picks the larger of 2 ln(p)/p (connectivity) and an
    expected degree of :data:`DEFAULT_ER_DEGREE`.
    """

    edge_prob: Optional[float] = None

    def resolved(self, p: int) -> float:
        if self.edge_prob is not None:
            return self.edge_prob
        return min(1.0, max(2.0 * math.log(p) / p, DEFAULT_ER_DEGREE / (p - 1)))


TopologyModel = Union[BA, ER]


@dataclass(frozen=True, eq=False)
class Topology:
    peer_count: int
    adjacency: tuple  # per-peer sorted np.ndarray of neighbour indices

    @classmethod
    def from_graph(cls, graph: nx.Graph) -> "Topology":
        p = graph.number_of_nodes()
        adj = tuple(np.array(sorted(graph.adj[i]), dtype=np.int64) for i in range(p))
        return cls(p, adj)

    @classmethod
    def from_edges(cls, p: int, edges: Sequence[tuple]) -> "Topology":
        g = nx.Graph()
        g.add_nodes_from(range(p))
        g.add_edges_from(edges)
        return cls.from_graph(g)

    def neighbors(self, peer: int) -> np.ndarray:
        return self.adjacency[peer]

    def degree(self, peer: int) -> int:
        return len(self.adjacency[peer])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, int(v)) for u in range(self.peer_count) for v in self.adjacency[u] if u < v]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.peer_count))
        g.add_edges_from(self.edges())
        return g

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def write_edge_list(self, path: Union[str, Path]) -> None:
        lines = [f"{u} {v}\n" for u, v in self.edges()]
        Path(path).write_text("".join(lines))

    @classmethod
    def read_edge_list(cls, path: Union[str, Path], p: int) -> "Topology":
        edges = []
        for line in Path(path).read_text().splitlines():
            if line.strip():
                u, v = line.split()
                edges.append((int(u), int(v)))
        return cls.from_edges(p, edges)


def _derived_seed(seed: int, attempt: int) -> int:
    return int(np.random.SeedSequence([seed, attempt]).generate_state(1)[0])


def build_topology(model: TopologyModel, p: int, rng_seed: int) -> Topology:
    """Connected undirected random graph over peers ``0..p-1``.

    Disconnected Erdos-Renyi samples are discarded and regenerated from a
    derived seed, so the result is drawn from the model conditioned on
    connectivity.
    """
    if p < 2:
        raise ConfigError(f"need at least 2 peers, got {p}")
    if isinstance(model, BA):
        if not 1 <= model.attach < p:
            raise ConfigError(f"BA attach must lie in [1, p), got {model.attach}")
        graph = nx.barabasi_albert_graph(p, model.attach, seed=_derived_seed(rng_seed, 0))
        return Topology.from_graph(graph)
    if isinstance(model, ER):
        q = model.resolved(p)
        if not 0 < q <= 1:
            raise ConfigError(f"ER edge probability must lie in (0, 1], got {q}")
        for attempt in range(MAX_REGENERATIONS):
            graph = nx.fast_gnp_random_graph(p, q, seed=_derived_seed(rng_seed, attempt))
            if nx.is_connected(graph):
                return Topology.from_graph(graph)
        raise ConnectivityFailure(
            f"{MAX_REGENERATIONS} ER({q:.4g}) samples on {p} peers were all disconnected"
        )
    raise ConfigError(f"unknown topology model {model!r}")


def sample_fanout(
    topology: Topology,
    peer: int,
    fo: Union[int, str],
    rng: np.random.Generator,
    online: Optional[np.ndarray] = None,
) -> list[int]:
    """Neighbours contacted by ``peer`` this round, in contact order.

    Draws ``min(fo, degree)`` neighbours uniformly without replacement;
    ``fo=ALL`` contacts every neighbour. When an ``online`` mask is given the
    draw is restricted to neighbours flagged online.
    """
    nbrs = topology.adjacency[peer]
    if online is not None:
        nbrs = nbrs[online[nbrs]]
    deg = len(nbrs)
    if deg == 0:
        raise IsolatedPeer(f"peer {peer} has no neighbour to contact")
    if fo == ALL or fo >= deg:
        return nbrs.tolist()
    if fo == 1:
        return [int(nbrs[rng.integers(deg)])]
    return rng.choice(nbrs, size=fo, replace=False).tolist()
