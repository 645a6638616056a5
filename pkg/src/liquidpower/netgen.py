"""Seeded generators for the network families used in the experiments.

G(n, p), preferential attachment and small-world graphs are undirected and
come back as symmetric digraphs. Spatial k-nearest-neighbour graphs and
k-layer graphs are directed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DelegationGraph

FAMILIES = ("gnp", "pref_attach", "small_world", "spatial", "k_layers")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _from_undirected(n: int, adj: list[set]) -> DelegationGraph:
    return DelegationGraph(n, tuple(tuple(sorted(a)) for a in adj))


def gen_gnp(n: int, p: float, seed=None) -> DelegationGraph:
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = _rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    adj = [set() for _ in range(n)]
    for a, b in zip(iu[keep].tolist(), ju[keep].tolist()):
        adj[a].add(b)
        adj[b].add(a)
    return _from_undirected(n, adj)


def gen_pref_attach(n: int, m: int, seed=None) -> DelegationGraph:
    """Barabasi-Albert style growth.

    Nodes 0..m attach to every earlier node, which forms a complete core of
    m + 1 nodes; each later node attaches to m distinct existing nodes drawn
    proportionally to degree (repeated draws, rejecting duplicates).
    Undirected edge count: m(m+1)/2 + m(n - m - 1).
    """
    if m < 1 or n <= m:
        raise ValueError("need m >= 1 and n > m")
    rng = _rng(seed)
    adj = [set() for _ in range(n)]
    ends: list[int] = []  # every edge endpoint, so uniform picks are degree-proportional
    for x in range(min(n, m + 1)):
        for v in range(x):
            adj[x].add(v)
            adj[v].add(x)
            ends += [x, v]
    for x in range(m + 1, n):
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(ends[int(rng.integers(len(ends)))])
        for v in sorted(chosen):
            adj[x].add(v)
            adj[v].add(x)
            ends += [x, v]
    return _from_undirected(n, adj)


def gen_small_world(n: int, k: int, rewire_p: float, seed=None) -> DelegationGraph:
    """Watts-Strogatz: ring lattice with k nearest neighbours, then rewiring.

    Each lattice edge (u, u+j) is, with probability ``rewire_p``, replaced by
    (u, w) for a uniform w that is neither u nor already adjacent to u.
    Rewiring never changes the number of edges (n k / 2).
    """
    if k % 2 or not 0 <= k < n:
        raise ValueError("k must be even and smaller than n")
    if not 0 <= rewire_p <= 1:
        raise ValueError("rewire probability must lie in [0, 1]")
    rng = _rng(seed)
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= rewire_p:
                continue
            free = [w for w in range(n) if w != u and w not in adj[u]]
            if not free:
                continue
            w = free[int(rng.integers(len(free)))]
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    return _from_undirected(n, adj)


def spatial_positions(n: int, dist: str, seed=None) -> np.ndarray:
    rng = _rng(seed)
    if dist == "uniform":
        return rng.uniform(-1.0, 1.0, size=(n, 2))
    if dist == "gaussian":
        return rng.normal(0.0, 1.0, size=(n, 2))
    raise ValueError(f"unknown position distribution {dist!r}")


def gen_spatial(n: int, k: int, dist: str = "uniform", seed=None, positions: Optional[np.ndarray] = None) -> DelegationGraph:
    """Arc from every node to its k nearest others; equal distances go to the lower id."""
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    pts = spatial_positions(n, dist, seed) if positions is None else np.asarray(positions, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
    ids = np.arange(n)
    rows = []
    for i in range(n):
        order = np.lexsort((ids, d2[i]))
        rows.append(tuple(int(j) for j in order if j != i)[:k])
    return DelegationGraph(n, tuple(rows))


def gen_k_layers(layers: int, layer_size: int) -> DelegationGraph:
    """Every node of layer j points at every node of layer j + 1; ids are layer-major."""
    if layers < 1 or layer_size < 1:
        raise ValueError("need at least one layer of at least one node")
    n = layers * layer_size
    rows = []
    for j in range(layers):
        nxt = tuple(range((j + 1) * layer_size, (j + 2) * layer_size)) if j + 1 < layers else ()
        rows += [nxt] * layer_size
    return DelegationGraph(n, tuple(rows))


def layer_of(voter: int, layer_size: int) -> int:
    return voter // layer_size


@dataclass(frozen=True)
class NetworkSpec:
    family: str
    n: int = 100
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown network family {self.family!r}")
        p = self.params
        if self.family == "gnp" and not 0 <= p.get("p", 0) <= 1:
            raise ValueError("p must lie in [0, 1]")
        if self.family == "pref_attach" and p.get("m", 1) < 1:
            raise ValueError("m must be at least 1")
        if self.family == "small_world" and not 0 <= p.get("rewire_p", 0.2) <= 1:
            raise ValueError("rewire probability must lie in [0, 1]")
        if self.family in ("small_world", "spatial") and p.get("k", 1) < 1:
            raise ValueError("k must be at least 1")

    def build(self) -> DelegationGraph:
        p = self.params
        if self.family == "gnp":
            return gen_gnp(self.n, p["p"], self.seed)
        if self.family == "pref_attach":
            return gen_pref_attach(self.n, p["m"], self.seed)
        if self.family == "small_world":
            return gen_small_world(self.n, p["k"], p.get("rewire_p", 0.2), self.seed)
        if self.family == "spatial":
            return gen_spatial(self.n, p["k"], p.get("dist", "uniform"), self.seed)
        return gen_k_layers(p["layers"], p["layer_size"])

    def to_dict(self) -> dict:
        return {"family": self.family, "n": self.n, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        return cls(d["family"], int(d.get("n", 100)), dict(d.get("params", {})), d.get("seed"))


def tuned_spec(family: str, n: int = 100, mean_in_degree: int = 10, seed=None, dist: str = "uniform") -> NetworkSpec:
    """Parameters giving roughly the requested mean in-degree."""
    d = mean_in_degree
    if family == "gnp":
        return NetworkSpec("gnp", n, {"p": d / (n - 1)}, seed)
    if family == "pref_attach":
        return NetworkSpec("pref_attach", n, {"m": d // 2}, seed)
    if family == "small_world":
        return NetworkSpec("small_world", n, {"k": d, "rewire_p": 0.2}, seed)
    if family == "spatial":
        return NetworkSpec("spatial", n, {"k": d, "dist": dist}, seed)
    if family == "k_layers":
        return NetworkSpec("k_layers", n, {"layers": n // d, "layer_size": d}, seed)
    raise ValueError(f"unknown network family {family!r}")
