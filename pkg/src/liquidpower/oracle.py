"""Exhaustive enumeration of delegation partitions: the exact reference engine.

Partitions are enumerated with a mixed-radix counter (voter 0 is the fastest
digit; each voter's actions are ordered vote +, vote -, then out-neighbours).
Criticality counts are accumulated per *delegation mask*, i.e. the set of
voters that delegate, because a partition's probability depends only on that
set. The rational measure is assembled from the integer counts at the end.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, prod
from typing import Optional, Sequence

import numpy as np

from .core import (
    VOTE_AGAINST,
    VOTE_FOR,
    BehaviorModel,
    DelegationGraph,
    WeightedVotingGame,
    batch_resolve,
    batch_roots,
)

DEFAULT_BUDGET = 10**8
CHUNK = 1 << 15


class EnumerationBudgetExceeded(RuntimeError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"{count} delegation partitions exceed the enumeration budget of {budget}")
        self.count = count
        self.budget = budget


@dataclass
class MeasureReport:
    """Per-voter measures with optional positive/negative criticality split."""

    measure: tuple[float, ...]
    positive: Optional[tuple[float, ...]] = None
    negative: Optional[tuple[float, ...]] = None
    engine: str = ""
    sampling: Optional[dict] = None
    exact: Optional[tuple[Fraction, ...]] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.measure)


@dataclass
class _Layout:
    """Per-voter action tables restricted to positive-probability actions."""

    succ: list[np.ndarray]
    sign: list[np.ndarray]
    delegates: list[np.ndarray]
    radix: list[int]
    varying: list[int]  # voters that may both vote and delegate; one mask bit each

    @property
    def total(self) -> int:
        return prod(self.radix)


def _layout(graph: DelegationGraph, model: BehaviorModel) -> _Layout:
    succ, sign, dele, radix, varying = [], [], [], [], []
    for i in range(graph.n):
        pd = model.delegation_prob[i]
        acts = []
        if pd < 1:
            acts += [VOTE_FOR, VOTE_AGAINST]
        if pd > 0:
            acts += list(graph.out_neighbors[i])
        if not acts:
            raise ValueError(f"voter {i} has no action with positive probability")
        succ.append(np.array([i if isinstance(a, str) else a for a in acts]))
        sign.append(np.array([-1 if a == VOTE_AGAINST else 1 for a in acts], dtype=np.int8))
        dele.append(np.array([not isinstance(a, str) for a in acts]))
        radix.append(len(acts))
        if 0 < pd < 1:
            varying.append(i)
    return _Layout(succ, sign, dele, radix, varying)


@dataclass
class BruteForceTally:
    """Integer criticality counts over an enumerated index range.

    ``counts[i, s, mask]`` counts partitions in which voter i is critical,
    i's own resolved vote is + / - / 0 for s = 0 / 1 / 2, and the set of
    delegating voters is ``mask``. Tallies over disjoint ranges merge by addition.
    """

    counts: np.ndarray
    start: int
    stop: int

    def merge(self, other: "BruteForceTally") -> "BruteForceTally":
        if self.stop == other.start:
            start, stop = self.start, other.stop
        elif other.stop == self.start:
            start, stop = other.start, self.stop
        else:
            start, stop = min(self.start, other.start), max(self.stop, other.stop)
        return BruteForceTally(self.counts + other.counts, start, stop)


def _decode(layout: _Layout, idx: np.ndarray):
    n = len(layout.radix)
    succ = np.empty((idx.size, n), dtype=np.int64)
    sign = np.empty((idx.size, n), dtype=np.int8)
    mask = np.zeros(idx.size, dtype=np.int64)
    bit = {v: k for k, v in enumerate(layout.varying)}
    rest = idx.copy()
    for i in range(n):
        rest, digit = np.divmod(rest, layout.radix[i])
        succ[:, i] = layout.succ[i][digit]
        sign[:, i] = layout.sign[i][digit]
        if i in bit:
            mask |= layout.delegates[i][digit].astype(np.int64) << bit[i]
    return succ, sign, mask


def _critical_by_override(succ, sign, weights, game, i):
    """Re-resolve with voter i forced to vote; True where flipping i flips the outcome."""
    forced = succ.copy()
    forced[:, i] = i
    roots = batch_roots(forced)
    is_voter = np.take_along_axis(forced, roots, axis=1) == roots
    root_sign = np.take_along_axis(sign, roots, axis=1)
    follows_i = roots == i
    carried = (follows_i * weights).sum(axis=1)
    others = is_voter & ~follows_i
    support = ((others & (root_sign > 0)) * weights).sum(axis=1)
    against = ((others & (root_sign < 0)) * weights).sum(axis=1)
    turnout = support + against + carried
    q = game.quota
    up = (support + carried) * q.denominator > q.numerator * turnout
    down = support * q.denominator > q.numerator * turnout
    return up & ~down


def enumerate_range(
    graph: DelegationGraph,
    game: WeightedVotingGame,
    model: BehaviorModel,
    start: int = 0,
    stop: Optional[int] = None,
) -> BruteForceTally:
    """Tally criticality over partitions with mixed-radix index in [start, stop)."""
    if graph.n != game.n:
        raise ValueError("graph and game have different voter counts")
    layout = _layout(graph, model)
    n = graph.n
    stop = layout.total if stop is None else min(stop, layout.total)
    counts = np.zeros((n, 3, 1 << len(layout.varying)), dtype=np.int64)
    weights = np.array(game.weights, dtype=np.int64)
    nbins = counts.shape[2]
    for lo in range(start, stop, CHUNK):
        idx = np.arange(lo, min(lo + CHUNK, stop), dtype=np.int64)
        succ, sign, mask = _decode(layout, idx)
        resolved = batch_resolve(succ, sign)
        for i in range(n):
            crit = _critical_by_override(succ, sign, weights, game, i)
            side = np.where(resolved[:, i] > 0, 0, np.where(resolved[:, i] < 0, 1, 2))
            hits = side[crit] * nbins + mask[crit]
            counts[i] += np.bincount(hits, minlength=3 * nbins).reshape(3, nbins)
    return BruteForceTally(counts, start, stop)


def _mask_probabilities(graph: DelegationGraph, model: BehaviorModel, layout: _Layout) -> list[Fraction]:
    """Probability of any single partition, indexed by its delegation mask."""
    base = Fraction(1)
    for i in range(graph.n):
        if i in layout.varying:
            continue
        if model.delegation_prob[i] == 0:
            base *= Fraction(1, 2)
        else:
            base *= Fraction(1, graph.out_degree(i))
    probs = [base]
    for v in layout.varying:
        pd = model.delegation_prob[v]
        vote, dele = (1 - pd) / 2, pd / graph.out_degree(v)
        probs = [p * vote for p in probs] + [p * dele for p in probs]
    return probs


def partition_count(graph: DelegationGraph, model: Optional[BehaviorModel] = None) -> int:
    """Number of partitions the oracle would enumerate."""
    if model is None:
        return prod(d + 2 for d in graph.out_degrees)
    return _layout(graph, model).total


def tally_to_fractions(tally: BruteForceTally, graph, model):
    """(measure, positive, negative) per voter as exact rationals."""
    layout = _layout(graph, model)
    probs = _mask_probabilities(graph, model, layout)
    denom = 1
    for p in probs:
        denom = lcm(denom, p.denominator)
    nums = [p.numerator * (denom // p.denominator) for p in probs]
    pos, neg, meas = [], [], []
    for i in range(graph.n):
        c = tally.counts[i]
        s = [sum(int(c[k, m]) * nums[m] for m in np.flatnonzero(c[k])) for k in range(3)]
        plus = Fraction(2 * s[0] + s[2], 2 * denom)
        minus = Fraction(2 * s[1] + s[2], 2 * denom)
        pos.append(plus)
        neg.append(minus)
        meas.append(plus + minus)
    return meas, pos, neg


def exact_measure_bruteforce(
    graph: DelegationGraph,
    game: WeightedVotingGame,
    model: BehaviorModel,
    budget: int = DEFAULT_BUDGET,
) -> MeasureReport:
    """LD Penrose-Banzhaf measure of every voter by full enumeration.

    Partitions with zero probability are skipped. A voter whose own resolved
    vote is an abstention (it delegates into a cycle) contributes half of
    each critical partition to the positive and half to the negative split.
    """
    total = partition_count(graph, model)
    if total > budget:
        raise EnumerationBudgetExceeded(total, budget)
    tally = enumerate_range(graph, game, model)
    meas, pos, neg = tally_to_fractions(tally, graph, model)
    return MeasureReport(
        measure=tuple(float(x) for x in meas),
        positive=tuple(float(x) for x in pos),
        negative=tuple(float(x) for x in neg),
        engine="brute",
        exact=tuple(meas),
        sampling={"partitions": total},
    )


def criticality_split_bruteforce(graph, game, model, i: int, budget: int = DEFAULT_BUDGET):
    """P(i positively critical), P(i negatively critical) as exact rationals."""
    total = partition_count(graph, model)
    if total > budget:
        raise EnumerationBudgetExceeded(total, budget)
    _, pos, neg = tally_to_fractions(enumerate_range(graph, game, model), graph, model)
    return pos[i], neg[i]


def banzhaf_classical(game: WeightedVotingGame) -> list[Fraction]:
    """Standard Penrose-Banzhaf measure by subset-sum counting over weights."""
    w = game.weights
    total = sum(w)
    q = game.quota
    out = []
    for i in range(len(w)):
        ways = [0] * (total + 1)
        ways[0] = 1
        for j, wj in enumerate(w):
            if j == i:
                continue
            for s in range(total, wj - 1, -1):
                ways[s] += ways[s - wj]
        swing = sum(
            ways[s]
            for s in range(total + 1)
            if ways[s] and not game.accepts(s, total) and game.accepts(s + w[i], total)
        )
        out.append(Fraction(swing, 2 ** (len(w) - 1)))
    return out


def pvr_measure_bruteforce(game: WeightedVotingGame, delegatees: Sequence[int]) -> list[Fraction]:
    """Restricted proxy-voting measure by listing every PV_r partition.

    Delegatees vote +/- and delegators must pick a delegatee, all uniformly.
    A delegatee is critical when flipping its vote (with its delegators)
    flips the outcome; a delegator is critical when switching between a
    supporting and an opposing delegatee does, which needs both to exist.
    """
    n = game.n
    vv = list(delegatees)
    vd = [i for i in range(n) if i not in set(vv)]
    w = game.weights
    total = sum(w)
    result = []
    for i in range(n):
        others_v = [v for v in vv if v != i]
        others_d = [d for d in vd if d != i]
        hits = configs = 0
        for signs in itertools.product((1, -1), repeat=len(others_v)):
            vote = dict(zip(others_v, signs))
            for choice in itertools.product(vv, repeat=len(others_d)):
                configs += 1
                support = sum(w[v] for v in others_v if vote[v] > 0)
                carried = w[i]
                for d, target in zip(others_d, choice):
                    if target == i:
                        carried += w[d]
                    elif vote[target] > 0:
                        support += w[d]
                if i in vd and not (1 in signs and -1 in signs):
                    continue
                if game.accepts(support + carried, total) and not game.accepts(support, total):
                    hits += 1
        result.append(Fraction(hits, configs))
    return result
