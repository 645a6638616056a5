"""Delegation graphs, weighted voting games and delegation resolution.

Voters are dense 0-based indices. A delegation partition assigns every voter
one action: ``VOTE_FOR`` ("+"), ``VOTE_AGAINST`` ("-") or the integer id of
an out-neighbour they delegate to. Resolving a partition follows every
delegation chain to a direct voter; chains that end in a cycle abstain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

VOTE_FOR = "+"
VOTE_AGAINST = "-"


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest repr so ``0.9`` becomes ``9/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to an exact rational")


@dataclass(frozen=True)
class DelegationGraph:
    """Simple digraph whose arcs are the admissible delegations."""

    n: int
    out_neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        nbrs = tuple(tuple(int(j) for j in row) for row in self.out_neighbors)
        object.__setattr__(self, "out_neighbors", nbrs)
        if len(nbrs) != self.n:
            raise ValueError(f"expected {self.n} out-neighbourhoods, got {len(nbrs)}")
        for i, row in enumerate(nbrs):
            if len(set(row)) != len(row):
                raise ValueError(f"duplicate out-neighbour of voter {i}")
            for j in row:
                if not 0 <= j < self.n:
                    raise ValueError(f"arc {i}->{j} leaves the voter range [0, {self.n})")
                if j == i:
                    raise ValueError(f"self-loop at voter {i}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "DelegationGraph":
        rows: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            rows[u].append(v)
        return cls(n, tuple(tuple(r) for r in rows))

    @classmethod
    def empty(cls, n: int) -> "DelegationGraph":
        return cls(n, tuple(() for _ in range(n)))

    @classmethod
    def complete(cls, n: int) -> "DelegationGraph":
        return cls(n, tuple(tuple(j for j in range(n) if j != i) for i in range(n)))

    @classmethod
    def bipartite(cls, n: int, delegatees: Iterable[int]) -> "DelegationGraph":
        """Proxy-voting graph: every non-delegatee may delegate to every delegatee."""
        vv = tuple(sorted(set(delegatees)))
        vset = set(vv)
        return cls(n, tuple(() if i in vset else vv for i in range(n)))

    def out_degree(self, i: int) -> int:
        return len(self.out_neighbors[i])

    @property
    def out_degrees(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.out_neighbors)

    @property
    def in_degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for row in self.out_neighbors:
            for j in row:
                deg[j] += 1
        return tuple(deg)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, row in enumerate(self.out_neighbors) for j in row]

    @property
    def num_arcs(self) -> int:
        return sum(len(r) for r in self.out_neighbors)

    def is_complete(self) -> bool:
        return all(len(r) == self.n - 1 for r in self.out_neighbors)

    def proxy_delegatees(self) -> tuple[int, ...] | None:
        """Delegatee set if this is a complete proxy-voting bipartite graph, else None.

        Delegatees are the voters with no out-arcs; every other voter must
        point at exactly that set.
        """
        vv = tuple(i for i in range(self.n) if not self.out_neighbors[i])
        if not vv:
            return None
        vset = set(vv)
        for row in self.out_neighbors:
            if row and set(row) != vset:
                return None
        return vv


@dataclass(frozen=True)
class WeightedVotingGame:
    """Positive integer weights and a quota ratio q in (1/2, 1]."""

    weights: tuple[int, ...]
    quota: Fraction = Fraction(1, 2)

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        if any(x < 1 for x in w):
            raise ValueError("weights must be positive integers")
        q = as_fraction(self.quota)
        if not Fraction(1, 2) <= q <= 1:
            raise ValueError(f"quota ratio {q} outside [1/2, 1]")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "quota", q)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    def accepts(self, support: int, turnout: int) -> bool:
        """True iff ``support > q * turnout``, compared exactly."""
        q = self.quota
        return support * q.denominator > q.numerator * turnout


@dataclass(frozen=True)
class DelegationPartition:
    actions: tuple

    def __post_init__(self):
        acts = []
        for a in self.actions:
            if a in (VOTE_FOR, VOTE_AGAINST):
                acts.append(a)
            else:
                acts.append(int(a))
        object.__setattr__(self, "actions", tuple(acts))

    def __len__(self):
        return len(self.actions)

    def validate(self, graph: DelegationGraph) -> None:
        if len(self.actions) != graph.n:
            raise ValueError("partition size does not match the graph")
        for i, a in enumerate(self.actions):
            if a in (VOTE_FOR, VOTE_AGAINST):
                continue
            if a not in graph.out_neighbors[i]:
                raise ValueError(f"voter {i} delegates to {a}, which is not an out-neighbour")

    @property
    def supporters(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.actions) if a == VOTE_FOR)

    @property
    def opposers(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.actions) if a == VOTE_AGAINST)

    def delegators_to(self, v: int) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.actions) if a == v and not isinstance(a, str))

    def with_vote(self, i: int, vote: str) -> "DelegationPartition":
        acts = list(self.actions)
        acts[i] = vote
        return DelegationPartition(tuple(acts))


@dataclass(frozen=True)
class DirectVotePartition:
    votes: tuple[int, ...]

    def __post_init__(self):
        v = tuple(int(x) for x in self.votes)
        if any(x not in (-1, 0, 1) for x in v):
            raise ValueError("direct votes must lie in {-1, 0, 1}")
        object.__setattr__(self, "votes", v)

    @property
    def plus(self) -> frozenset[int]:
        return frozenset(i for i, x in enumerate(self.votes) if x == 1)

    @property
    def minus(self) -> frozenset[int]:
        return frozenset(i for i, x in enumerate(self.votes) if x == -1)

    @property
    def zero(self) -> frozenset[int]:
        return frozenset(i for i, x in enumerate(self.votes) if x == 0)


@dataclass(frozen=True)
class BehaviorModel:
    """Per-voter delegation probabilities; direct votes split 1/2 : 1/2."""

    delegation_prob: tuple[Fraction, ...]
    label: str = field(default="per_voter", compare=False)

    def __post_init__(self):
        probs = tuple(as_fraction(p) for p in self.delegation_prob)
        if any(not 0 <= p <= 1 for p in probs):
            raise ValueError("delegation probabilities must lie in [0, 1]")
        object.__setattr__(self, "delegation_prob", probs)

    @classmethod
    def per_voter(cls, graph: DelegationGraph, probs: Sequence) -> "BehaviorModel":
        if len(probs) != graph.n:
            raise ValueError("need one delegation probability per voter")
        model = cls(tuple(probs))
        for i, p in enumerate(model.delegation_prob):
            if p and not graph.out_neighbors[i]:
                raise ValueError(f"voter {i} has no out-neighbour but delegation probability {p}")
        return model

    @classmethod
    def global_uniformity(cls, graph: DelegationGraph) -> "BehaviorModel":
        """p_d = |OutN(i)| / (|OutN(i)| + 2): every partition equally likely."""
        return cls(tuple(Fraction(d, d + 2) for d in graph.out_degrees), "global_uniformity")

    @classmethod
    def constant(cls, graph: DelegationGraph, p_d) -> "BehaviorModel":
        """Same p_d for every voter that has somewhere to delegate."""
        p = as_fraction(p_d)
        return cls(tuple(p if d else Fraction(0) for d in graph.out_degrees), "constant_pd")

    def vote_prob(self, i: int) -> Fraction:
        return 1 - self.delegation_prob[i]

    def as_floats(self) -> np.ndarray:
        return np.array([float(p) for p in self.delegation_prob])


def resolve_delegations(partition: DelegationPartition, graph: DelegationGraph) -> DirectVotePartition:
    """Follow every delegation chain to a direct vote; cycles yield abstention.

    Three-state marking (unseen / on the current chain / resolved) resolves
    all voters in one linear pass.
    """
    partition.validate(graph)
    acts = partition.actions
    n = graph.n
    UNSEEN, ACTIVE = 2, 3
    out = [UNSEEN] * n
    for start in range(n):
        if out[start] != UNSEEN:
            continue
        chain = []
        v = start
        while True:
            if out[v] == ACTIVE:
                result = 0
                break
            if out[v] != UNSEEN:
                result = out[v]
                break
            a = acts[v]
            if a == VOTE_FOR or a == VOTE_AGAINST:
                out[v] = 1 if a == VOTE_FOR else -1
                result = out[v]
                break
            out[v] = ACTIVE
            chain.append(v)
            v = a
        for u in chain:
            out[u] = result
    return DirectVotePartition(tuple(out))


def wvg_outcome(votes: DirectVotePartition, game: WeightedVotingGame) -> int:
    """+1 iff w(T+) > q * w(T+ u T-), else -1 (so an all-abstain profile rejects)."""
    if len(votes.votes) != game.n:
        raise ValueError("vote profile and game have different voter counts")
    support = turnout = 0
    for x, w in zip(votes.votes, game.weights):
        if x:
            turnout += w
            if x > 0:
                support += w
    return 1 if game.accepts(support, turnout) else -1


def criticality_delta(i: int, opposers, supporters, followers, game: WeightedVotingGame) -> int:
    """1 iff flipping i's vote, carrying its followers' weight along, flips the outcome.

    ``opposers`` and ``supporters`` are the other resolved votes and
    ``followers`` the voters whose delegations reach i; everyone else abstains.
    """
    x, y, z = set(opposers), set(supporters), set(followers)
    if x & y or x & z or y & z or i in x | y | z:
        raise ValueError("opposers, supporters and followers must be disjoint and exclude i")
    w = game.weights
    carried = w[i] + sum(w[j] for j in z)
    against = sum(w[j] for j in x)
    support = sum(w[j] for j in y)
    turnout = against + support + carried
    up = 1 if game.accepts(support + carried, turnout) else -1
    down = 1 if game.accepts(support, turnout) else -1
    return (up - down) // 2


def partition_probability(
    partition: DelegationPartition, graph: DelegationGraph, model: BehaviorModel
) -> Fraction:
    partition.validate(graph)
    prob = Fraction(1)
    for i, a in enumerate(partition.actions):
        pd = model.delegation_prob[i]
        if a == VOTE_FOR or a == VOTE_AGAINST:
            prob *= (1 - pd) / 2
        else:
            prob *= pd / len(graph.out_neighbors[i])
    return prob


def action_choices(graph: DelegationGraph, i: int) -> tuple:
    """Action order used by every enumerator: vote +, vote -, then out-neighbours."""
    return (VOTE_FOR, VOTE_AGAINST) + graph.out_neighbors[i]


# ---------------------------------------------------------------------------
# Vectorised resolution over batches of partitions.
#
# A batch is encoded as ``succ`` (B, n) int array, where succ[b, i] == i for a
# direct voter and the delegate otherwise, plus ``sign`` (B, n) in {-1, +1}
# holding the direct votes (ignored for delegators).


def _doubling_steps(n: int) -> int:
    return max(1, int(np.ceil(np.log2(max(n, 2)))) + 1)


def batch_roots(succ: np.ndarray) -> np.ndarray:
    """Node reached after >= n delegation steps: the root voter, or a cycle node."""
    g = succ
    for _ in range(_doubling_steps(succ.shape[1])):
        g = np.take_along_axis(g, g, axis=1)
    return g


def batch_resolve(succ: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """Resolved votes in {-1, 0, +1} for every partition in the batch."""
    roots = batch_roots(succ)
    is_voter = np.take_along_axis(succ, roots, axis=1) == roots
    return np.where(is_voter, np.take_along_axis(sign, roots, axis=1), 0).astype(np.int8)


def encode_partition(partition: DelegationPartition) -> tuple[np.ndarray, np.ndarray]:
    n = len(partition)
    succ = np.arange(n)
    sign = np.ones(n, dtype=np.int8)
    for i, a in enumerate(partition.actions):
        if a == VOTE_AGAINST:
            sign[i] = -1
        elif a != VOTE_FOR:
            succ[i] = a
    return succ, sign


def decode_partition(succ: np.ndarray, sign: np.ndarray) -> DelegationPartition:
    acts = []
    for i, (s, v) in enumerate(zip(succ.tolist(), sign.tolist())):
        if s == i:
            acts.append(VOTE_FOR if v > 0 else VOTE_AGAINST)
        else:
            acts.append(s)
    return DelegationPartition(tuple(acts))
