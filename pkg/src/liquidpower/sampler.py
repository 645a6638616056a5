"""Monte Carlo estimation of the measure on arbitrary delegation graphs.

Each sampled partition is resolved once. For every voter i the outcome with
i forced to vote is read off from the weight of i's *follower tree* (i plus
everyone whose delegation chain passes through i) and the resolved tallies of
the rest, so one sample costs O(n * depth) array work for all voters at once.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    BehaviorModel,
    DelegationGraph,
    DelegationPartition,
    WeightedVotingGame,
    batch_resolve,
    batch_roots,
    decode_partition,
)
from .oracle import MeasureReport

BLOCK = 4096
GENERATOR = "numpy.PCG64"
DEFAULT_DELTA = 0.05


def required_samples(n: int, epsilon: float, delta: float) -> int:
    """Smallest k with every voter's estimate within epsilon, jointly with prob. 1 - delta."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    return max(1, math.ceil(math.log(2 * n / delta) / (2 * epsilon**2)))


def implied_epsilon(n: int, k: int, delta: float = DEFAULT_DELTA) -> float:
    return math.sqrt(math.log(2 * n / delta) / (2 * k))


@dataclass(frozen=True)
class SamplingPlan:
    epsilon: float
    delta: float
    k: int
    seed: int = 0
    derived: bool = True

    def __post_init__(self):
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if self.k < 1:
            raise ValueError("need at least one sample")

    @classmethod
    def hoeffding(cls, n: int, epsilon: float, delta: float, seed: int = 0) -> "SamplingPlan":
        return cls(epsilon, delta, required_samples(n, epsilon, delta), seed, True)

    @classmethod
    def fixed(cls, n: int, k: int, seed: int = 0, delta: float = DEFAULT_DELTA) -> "SamplingPlan":
        eps = implied_epsilon(n, k, delta)
        return cls(min(eps, 1 - 1e-12), delta, k, seed, False)


class _Sampler:
    """Padded neighbour table and per-voter probabilities for vectorised draws."""

    def __init__(self, graph: DelegationGraph, model: BehaviorModel):
        self.n = graph.n
        self.deg = np.array(graph.out_degrees, dtype=np.int64)
        width = max(1, int(self.deg.max()) if self.n else 1)
        self.nbrs = np.zeros((self.n, width), dtype=np.int64)
        for i, row in enumerate(graph.out_neighbors):
            self.nbrs[i, : len(row)] = row
            self.nbrs[i, len(row):] = i
        self.p_d = model.as_floats()

    def draw(self, rng: np.random.Generator, size: int):
        n = self.n
        u = rng.random((size, n))
        pick = rng.random((size, n))
        vote = rng.integers(0, 2, size=(size, n), dtype=np.int8)
        delegates = u < self.p_d
        slot = np.minimum((pick * self.deg).astype(np.int64), np.maximum(self.deg - 1, 0))
        target = self.nbrs[np.arange(n), slot]
        succ = np.where(delegates, target, np.arange(n))
        sign = (2 * vote - 1).astype(np.int8)
        return succ, sign


def sample_partitions(graph: DelegationGraph, model: BehaviorModel, rng: np.random.Generator, size: int):
    """``size`` independent partitions as (succ, sign) arrays; see ``core.batch_resolve``."""
    return _Sampler(graph, model).draw(rng, size)


def sample_partition(graph: DelegationGraph, model: BehaviorModel, rng: np.random.Generator) -> DelegationPartition:
    succ, sign = sample_partitions(graph, model, rng, 1)
    return decode_partition(succ[0], sign[0])


def critical_all(succ: np.ndarray, sign: np.ndarray, weights: np.ndarray, game: WeightedVotingGame):
    """Criticality of every voter in every partition of the batch.

    Returns ``(critical, resolved)``, both (B, n): a boolean array and the
    resolved votes in {-1, 0, 1}. Cycles are cut at their members; a cycle
    member forced to vote gathers the whole component feeding the cycle.
    """
    B, n = succ.shape
    cols = np.arange(n)
    voter = succ == cols
    roots = batch_roots(succ)
    on_cycle = np.zeros((B, n), dtype=bool)
    np.put_along_axis(on_cycle, roots, True, axis=1)
    on_cycle &= ~voter

    cut = np.where(on_cycle, cols, succ)
    flat = (np.arange(B) * n)[:, None]
    w = np.broadcast_to(weights, (B, n))
    subtree = w.astype(np.int64).copy()
    cur = np.broadcast_to(cols, (B, n)).copy()
    while True:
        nxt = np.take_along_axis(cut, cur, axis=1)
        moving = nxt != cur
        if not moving.any():
            break
        cur = nxt
        subtree += np.bincount((flat + cur)[moving], weights=w[moving], minlength=B * n).reshape(B, n).astype(np.int64)
    final = cur

    # cycle representative: smallest member id, by pointer doubling along the cycle
    rep = np.where(on_cycle, cols, n)
    g = succ
    for _ in range(int(np.ceil(np.log2(max(n, 2)))) + 1):
        rep = np.minimum(rep, np.where(on_cycle, np.take_along_axis(rep, g, axis=1), n))
        g = np.take_along_axis(g, g, axis=1)
    comp = np.bincount((flat + np.where(on_cycle, rep, 0))[on_cycle], weights=subtree[on_cycle], minlength=B * n)
    comp = comp.reshape(B, n).astype(np.int64)
    carried = np.where(on_cycle, np.take_along_axis(comp, np.minimum(rep, n - 1), axis=1), subtree)

    root_is_voter = np.take_along_axis(voter, final, axis=1)
    resolved = np.where(root_is_voter, np.take_along_axis(sign, final, axis=1), 0).astype(np.int8)
    support = ((resolved > 0) * w).sum(axis=1, keepdims=True)
    against = ((resolved < 0) * w).sum(axis=1, keepdims=True)
    support = support - np.where(resolved > 0, carried, 0)
    against = against - np.where(resolved < 0, carried, 0)
    turnout = support + against + carried
    q = game.quota
    up = (support + carried) * q.denominator > q.numerator * turnout
    down = support * q.denominator > q.numerator * turnout
    return up & ~down, resolved


def critical_by_resolution(succ, sign, weights, game):
    """Slow path: full re-resolution with each voter forced to vote in turn."""
    from .oracle import _critical_by_override

    return np.stack([_critical_by_override(succ, sign, weights, game, i) for i in range(succ.shape[1])], axis=1)


@dataclass
class SampleCounts:
    """Per-voter critical counts over a number of samples; merge by addition."""

    critical: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    samples: int

    @classmethod
    def zeros(cls, n: int) -> "SampleCounts":
        z = np.zeros(n, dtype=np.float64)
        return cls(z.copy(), z.copy(), z.copy(), 0)

    def __add__(self, other: "SampleCounts") -> "SampleCounts":
        return SampleCounts(
            self.critical + other.critical,
            self.positive + other.positive,
            self.negative + other.negative,
            self.samples + other.samples,
        )


def block_counts(
    graph: DelegationGraph,
    game: WeightedVotingGame,
    model: BehaviorModel,
    seed: int,
    block: int,
    size: int,
    recheck: float = 0.0,
) -> SampleCounts:
    """Counts for sample block ``block`` of the stream defined by ``seed``.

    ``recheck`` is the fraction of samples re-verified against full
    re-resolution; a mismatch raises AssertionError.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
    succ, sign = _Sampler(graph, model).draw(rng, size)
    weights = np.array(game.weights, dtype=np.int64)
    crit, resolved = critical_all(succ, sign, weights, game)
    if recheck > 0:
        m = max(1, int(round(recheck * size)))
        rows = np.linspace(0, size - 1, m).astype(np.int64)
        slow = critical_by_resolution(succ[rows], sign[rows], weights, game)
        if not np.array_equal(slow, crit[rows]):
            raise AssertionError("fast criticality disagrees with full re-resolution")
    half = 0.5 * (crit & (resolved == 0))
    return SampleCounts(
        crit.sum(axis=0).astype(np.float64),
        (crit & (resolved > 0)).sum(axis=0) + half.sum(axis=0),
        (crit & (resolved < 0)).sum(axis=0) + half.sum(axis=0),
        size,
    )


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LIQUIDPOWER_THREADS", "1")))
    except ValueError:
        return 1


def sample_counts(graph, game, model, k: int, seed: int, first_block: int = 0, recheck: float = 0.0) -> SampleCounts:
    """Counts over the first k samples of the stream (blocks of BLOCK samples)."""
    sizes = [min(BLOCK, k - lo) for lo in range(0, k, BLOCK)]
    jobs = [(first_block + b, s) for b, s in enumerate(sizes)]

    def run(job):
        return block_counts(graph, game, model, seed, job[0], job[1], recheck)

    total = SampleCounts.zeros(graph.n)
    workers = min(_threads(), len(jobs)) if jobs else 1
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    for part in parts:
        total = total + part
    return total


def estimate_measures(
    graph: DelegationGraph,
    game: WeightedVotingGame,
    model: BehaviorModel,
    plan: SamplingPlan,
    recheck: float = 0.0,
) -> MeasureReport:
    if graph.n != game.n:
        raise ValueError("graph and game have different voter counts")
    counts = sample_counts(graph, game, model, plan.k, plan.seed, recheck=recheck)
    k = counts.samples
    return MeasureReport(
        measure=tuple((counts.critical / k).tolist()),
        positive=tuple((counts.positive / k).tolist()),
        negative=tuple((counts.negative / k).tolist()),
        engine="sample",
        sampling={
            "k": plan.k,
            "epsilon": plan.epsilon,
            "delta": plan.delta,
            "seed": plan.seed,
            "derived": plan.derived,
            "generator": GENERATOR,
            "confidence": (
                f"every estimate within {plan.epsilon:.6g} of the true measure "
                f"with probability at least {1 - plan.delta:.6g}"
            ),
        },
    )
