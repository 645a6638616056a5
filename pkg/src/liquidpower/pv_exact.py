"""Pseudo-polynomial measures for proxy voting.

Voters split into delegatees, who always vote, and delegators, who vote
directly or delegate to any delegatee. The measure of a voter is a sum over
*decompositions*: sizes and weights of the supporting / opposing / following
groups on each side. Each decomposition is weighted by the number of ordered
set partitions realising it (``count_partitions``) times the probability of
one such partition.

``pvr_*`` functions cover the restricted variant where delegators must delegate.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .core import BehaviorModel, DelegationGraph, WeightedVotingGame, as_fraction

# Above this many factors in one probability product, terms are built in log space.
LOG_SPACE_EXPONENT = 1000


# ---------------------------------------------------------------------------
# Counting ordered c-partitions by size and weight.


def count_partitions(weights: Sequence[int], c: int, sizes: Sequence[int], group_weights: Sequence[int]) -> int:
    """Ordered c-partitions of ``weights`` with the first c-1 groups' sizes and weights fixed.

    The last group takes whatever remains. Memoised top-down recursion over
    the item position: item k joins one of the first c-1 groups or the last.
    """
    if c < 2:
        raise ValueError("need at least two groups")
    if len(sizes) != c - 1 or len(group_weights) != c - 1:
        raise ValueError(f"expected {c - 1} sizes and {c - 1} group weights")
    w = tuple(int(x) for x in weights)
    m = len(w)

    @lru_cache(maxsize=None)
    def lam(k: int, ns: tuple, ws: tuple) -> int:
        if any(x < 0 for x in ns) or any(x < 0 for x in ws):
            return 0
        if not any(ns) and not any(ws):
            return 1
        if k == m:
            return 0
        total = lam(k + 1, ns, ws)
        for g in range(c - 1):
            ns2 = ns[:g] + (ns[g] - 1,) + ns[g + 1:]
            ws2 = ws[:g] + (ws[g] - w[k],) + ws[g + 1:]
            total += lam(k + 1, ns2, ws2)
        return total

    result = lam(0, tuple(int(x) for x in sizes), tuple(int(x) for x in group_weights))
    lam.cache_clear()
    return result


def partition_count_table(weights: Iterable[int], c: int) -> dict[tuple, int]:
    """Every nonzero count of ``count_partitions`` at once.

    Keys are ``(n_1, ..., n_{c-1}, w_1, ..., w_{c-1})``. The table is built
    forward, one item at a time, so only reachable size/weight tuples are
    stored; equal weights collapse onto the same keys.
    """
    g = c - 1
    table: dict[tuple, int] = {(0,) * (2 * g): 1}
    for wk in weights:
        nxt: dict[tuple, int] = defaultdict(int)
        for key, cnt in table.items():
            nxt[key] += cnt
            for j in range(g):
                k2 = list(key)
                k2[j] += 1
                k2[g + j] += wk
                nxt[tuple(k2)] += cnt
        table = dict(nxt)
    return table


# ---------------------------------------------------------------------------
# Instances and profile probabilities.


@dataclass(frozen=True)
class ProxyInstance:
    game: WeightedVotingGame
    delegatees: tuple[int, ...]
    p_d: Fraction = Fraction(0)

    def __post_init__(self):
        vv = tuple(sorted(set(int(i) for i in self.delegatees)))
        if not vv:
            raise ValueError("the delegatee set must be nonempty")
        if any(not 0 <= i < self.game.n for i in vv):
            raise ValueError("delegatee id out of range")
        object.__setattr__(self, "delegatees", vv)
        p = as_fraction(self.p_d)
        if not 0 <= p <= 1:
            raise ValueError("p_d must lie in [0, 1]")
        object.__setattr__(self, "p_d", p)

    @property
    def n(self) -> int:
        return self.game.n

    @property
    def delegators(self) -> tuple[int, ...]:
        vset = set(self.delegatees)
        return tuple(i for i in range(self.n) if i not in vset)

    @property
    def n_v(self) -> int:
        return len(self.delegatees)

    @property
    def n_d(self) -> int:
        return self.n - self.n_v

    def graph(self) -> DelegationGraph:
        return DelegationGraph.bipartite(self.n, self.delegatees)

    def behavior(self) -> BehaviorModel:
        return BehaviorModel.constant(self.graph(), self.p_d)


def pv_prob_delegatee(n_v_plus: int, n_d_plus: int, n_d_minus: int, n_v: int, n_d: int, p_d):
    """Probability of one partition of V minus a delegatee i into +, - and i's followers.

    Works in whatever number type ``p_d`` has (float or Fraction). Profiles
    violating the size constraints have probability 0.
    """
    n_v_minus = n_v - 1 - n_v_plus
    n_i = n_d - n_d_plus - n_d_minus
    if n_v_plus < 0 or n_v_minus < 0 or n_d_plus < 0 or n_d_minus < 0 or n_i < 0:
        return 0 * p_d
    half = (1 - p_d) / 2
    return (
        _pow(_one_half(p_d), n_v - 1)
        * _pow(half + p_d * n_v_plus / n_v, n_d_plus)
        * _pow(half + p_d * n_v_minus / n_v, n_d_minus)
        * _pow(p_d / n_v, n_i)
    )


def pv_prob_delegator(n_v_plus: int, n_d_plus: int, n_v: int, n_d: int, p_d):
    """Probability of one partition of V minus a delegator into + and - voters."""
    n_v_minus = n_v - n_v_plus
    n_d_minus = n_d - 1 - n_d_plus
    if n_v_plus < 0 or n_v_minus < 0 or n_d_plus < 0 or n_d_minus < 0:
        return 0 * p_d
    half = (1 - p_d) / 2
    return (
        _pow(_one_half(p_d), n_v)
        * _pow(half + p_d * n_v_plus / n_v, n_d_plus)
        * _pow(half + p_d * n_v_minus / n_v, n_d_minus)
    )


def pvr_prob_delegatee(n_v_plus: int, n_d_plus: int, n_d_minus: int, n_v: int, n_d: int) -> Fraction:
    n_v_minus = n_v - 1 - n_v_plus
    n_i = n_d - n_d_plus - n_d_minus
    if min(n_v_plus, n_v_minus, n_d_plus, n_d_minus, n_i) < 0:
        return Fraction(0)
    return Fraction(n_v_plus**n_d_plus * n_v_minus**n_d_minus, 2 ** (n_v - 1) * n_v**n_d)


def pvr_prob_delegator(n_v_plus: int, n_d_plus: int, n_v: int, n_d: int) -> Fraction:
    n_v_minus = n_v - n_v_plus
    n_d_minus = n_d - 1 - n_d_plus
    if min(n_v_plus, n_v_minus, n_d_plus, n_d_minus) < 0:
        return Fraction(0)
    return Fraction(n_v_plus**n_d_plus * n_v_minus**n_d_minus, 2**n_v * n_v ** (n_d - 1))


def _one_half(like):
    return Fraction(1, 2) if isinstance(like, Fraction) else 0.5


def _pow(base, exp: int):
    # 0 ** 0 == 1 is the convention the formulas need
    return base**exp


# ---------------------------------------------------------------------------
# Decomposition sums.


class _Accumulator:
    """Sums count x probability terms; floats go through math.fsum, rationals stay exact."""

    def __init__(self, exact: bool):
        self.exact = exact
        self.terms: list = []

    def add(self, count: int, prob, log_prob: Optional[float] = None):
        if self.exact:
            self.terms.append(count * prob)
        elif log_prob is not None:
            self.terms.append(math.exp(math.log(count) + log_prob))
        else:
            self.terms.append(float(count) * float(prob))

    def total(self):
        if self.exact:
            return sum(self.terms, Fraction(0))
        return math.fsum(self.terms)


def _log_pow(base: float, exp: int) -> float:
    if exp == 0:
        return 0.0
    if base <= 0:
        return -math.inf
    return exp * math.log(base)


def _log_pv_delegatee(nvp, ndp, ndm, n_v, n_d, p_d: float) -> float:
    nvm = n_v - 1 - nvp
    ni = n_d - ndp - ndm
    half = (1 - p_d) / 2
    return (
        -(n_v - 1) * math.log(2)
        + _log_pow(half + p_d * nvp / n_v, ndp)
        + _log_pow(half + p_d * nvm / n_v, ndm)
        + _log_pow(p_d / n_v, ni)
    )


def _log_pv_delegator(nvp, ndp, n_v, n_d, p_d: float) -> float:
    half = (1 - p_d) / 2
    return (
        -n_v * math.log(2)
        + _log_pow(half + p_d * nvp / n_v, ndp)
        + _log_pow(half + p_d * (n_v - nvp) / n_v, n_d - 1 - ndp)
    )


class _ProxyTables:
    """Count tables shared between voters of one instance.

    The three-way table over all delegators serves every delegatee query;
    the other tables depend only on the removed voter's side and weight.
    """

    def __init__(self, inst: ProxyInstance):
        self.inst = inst
        w = inst.game.weights
        self.wv = [w[i] for i in inst.delegatees]
        self.wd = [w[i] for i in inst.delegators]
        self._cache: dict = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def delegators_three_way(self):
        return self._get(("d3",), lambda: partition_count_table(self.wd, 3))

    def delegators_two_way_without(self, weight: int):
        return self._get(("d2", weight), lambda: partition_count_table(_drop_one(self.wd, weight), 2))

    def delegatees_two_way_without(self, weight: Optional[int]):
        src = self.wv if weight is None else _drop_one(self.wv, weight)
        return self._get(("v2", weight), lambda: partition_count_table(src, 2))


def _drop_one(ws: list[int], weight: int) -> list[int]:
    out = list(ws)
    out.remove(weight)
    return out


def _pv_delegatee_sum(inst, tables, wi, p_d, exact, restricted, criterion):
    game = inst.game
    W = game.total_weight
    n_v, n_d = inst.n_v, inst.n_d
    acc = _Accumulator(exact)
    use_log = not exact and not restricted and n_d + n_v > LOG_SPACE_EXPONENT
    d3 = tables.delegators_three_way()
    for (nvp, wvp), c2 in tables.delegatees_two_way_without(wi).items():
        for (ndp, ni, wdp, wfol), c1 in d3.items():
            ndm = n_d - ndp - ni
            if not criterion(game, wvp + wdp, wi + wfol, W):
                continue
            if restricted:
                prob = pvr_prob_delegatee(nvp, ndp, ndm, n_v, n_d)
                if prob:
                    acc.add(c1 * c2, prob)
            elif use_log:
                lp = _log_pv_delegatee(nvp, ndp, ndm, n_v, n_d, float(p_d))
                if lp > -math.inf:
                    acc.add(c1 * c2, None, lp)
            else:
                acc.add(c1 * c2, pv_prob_delegatee(nvp, ndp, ndm, n_v, n_d, p_d))
    return acc.total()


def _pv_delegator_sum(inst, tables, wi, p_d, exact, restricted, criterion):
    game = inst.game
    W = game.total_weight
    n_v, n_d = inst.n_v, inst.n_d
    acc = _Accumulator(exact)
    use_log = not exact and not restricted and n_d + n_v > LOG_SPACE_EXPONENT
    d2 = tables.delegators_two_way_without(wi)
    for (nvp, wvp), c2 in tables.delegatees_two_way_without(None).items():
        if restricted and (nvp == 0 or nvp == n_v):
            continue
        for (ndp, wdp), c1 in d2.items():
            if not criterion(game, wvp + wdp, wi, W):
                continue
            if restricted:
                acc.add(c1 * c2, pvr_prob_delegator(nvp, ndp, n_v, n_d))
            elif use_log:
                lp = _log_pv_delegator(nvp, ndp, n_v, n_d, float(p_d))
                if lp > -math.inf:
                    acc.add(c1 * c2, None, lp)
            else:
                acc.add(c1 * c2, pv_prob_delegator(nvp, ndp, n_v, n_d, p_d))
    return acc.total()


def _swing(game: WeightedVotingGame, support: int, carried: int, turnout: int) -> bool:
    """Supporting weight lies in (q*W - carried, q*W]: flipping the carried block flips the outcome."""
    return game.accepts(support + carried, turnout) and not game.accepts(support, turnout)


def _always(game, support, carried, turnout) -> bool:
    return True


def _number(p_d: Fraction, exact: bool):
    return p_d if exact else float(p_d)


def pv_measure(inst: ProxyInstance, i: int, exact: bool = False, _tables=None):
    """Measure of voter i in the proxy-voting setting.

    With ``exact=True`` the result is a Fraction (p_d is already rational).
    """
    tables = _tables or _ProxyTables(inst)
    wi = inst.game.weights[i]
    p = _number(inst.p_d, exact)
    if i in inst.delegatees:
        return _pv_delegatee_sum(inst, tables, wi, p, exact, False, _swing)
    return _pv_delegator_sum(inst, tables, wi, p, exact, False, _swing)


def pvr_measure(inst: ProxyInstance, i: int, exact: bool = False, _tables=None):
    """Measure of voter i when delegators must delegate (p_d is ignored)."""
    tables = _tables or _ProxyTables(inst)
    wi = inst.game.weights[i]
    if i in inst.delegatees:
        value = _pv_delegatee_sum(inst, tables, wi, None, True, True, _swing)
    else:
        value = _pv_delegator_sum(inst, tables, wi, None, True, True, _swing)
    return value if exact else float(value)


def _all_voters(inst: ProxyInstance, fn, exact: bool) -> list:
    tables = _ProxyTables(inst)
    vset = set(inst.delegatees)
    memo: dict = {}
    out = []
    for i in range(inst.n):
        # the measure depends only on the voter's side and weight
        key = (i in vset, inst.game.weights[i])
        if key not in memo:
            memo[key] = fn(inst, i, exact=exact, _tables=tables)
        out.append(memo[key])
    return out


def pv_measures(inst: ProxyInstance, exact: bool = False) -> list:
    return _all_voters(inst, pv_measure, exact)


def pvr_measures(inst: ProxyInstance, exact: bool = False) -> list:
    return _all_voters(inst, pvr_measure, exact)


def pv_normalization(inst: ProxyInstance, i: int, exact: bool = False):
    """Total probability over all profiles seen by voter i; 1 up to rounding."""
    tables = _ProxyTables(inst)
    wi = inst.game.weights[i]
    p = _number(inst.p_d, exact)
    if i in inst.delegatees:
        return _pv_delegatee_sum(inst, tables, wi, p, exact, False, _always)
    return _pv_delegator_sum(inst, tables, wi, p, exact, False, _always)
