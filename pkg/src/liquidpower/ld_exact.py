"""Pseudo-polynomial measure for liquid democracy on a complete digraph.

Every voter delegates with the same probability p_d, uniformly to one of the
other n - 1 voters. For a voter i, the rest of the electorate splits into
supporters, opposers, abstainers trapped in cycles and i's (transitive)
followers; the probability of a given split depends only on the four group
sizes, through the in-forest probabilities ``pld`` and the cycle term ``p0``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .core import WeightedVotingGame, as_fraction
from .pv_exact import partition_count_table


class ForestProbTable:
    """Memoised in-forest probabilities for one (n, p_d).

    ``value(m, p)`` is the probability that m given voters form an in-forest
    whose roots all take one particular action of probability p, every
    non-root delegating to another member. The table for the root action
    "delegate to a fixed outsider" (p = p_d / (n - 1)) is needed by every
    other table and is built first.
    """

    def __init__(self, n: int, p_d):
        self.n = n
        self.p_d = p_d
        self.step = p_d / (n - 1) if n > 1 else p_d * 0
        self._tables: dict = {}
        self._binom: list[list[int]] = [[1]]
        self.inner = self._build(self.step, None)

    def _binomials(self, m: int) -> list[int]:
        while len(self._binom) <= m:
            k = len(self._binom)
            self._binom.append([math.comb(k, j) for j in range(k + 1)])
        return self._binom[m]

    def _build(self, p, inner: Optional[list]) -> list:
        n, pd, step = self.n, self.p_d, self.step
        vals = [p * 0 + 1]
        for m in range(1, n):
            c = self._binomials(m - 1)
            total = p * 0
            for m1 in range(m):
                m2 = m - 1 - m1
                delegated = vals[m1] if inner is None else inner[m1]
                total += c[m1] * delegated * vals[m2] * (p + pd * m2 / (n - 1))
            vals.append(total)
        return vals

    def table(self, p) -> list:
        if p == self.step:
            return self.inner
        if p not in self._tables:
            self._tables[p] = self._build(p, self.inner)
        return self._tables[p]

    def value(self, m: int, p):
        return self.table(p)[m]


def pld(m: int, p, n: int, p_d):
    """In-forest probability for m voters whose roots act with probability p."""
    if not 0 <= m <= max(n - 1, 0):
        raise ValueError("m must lie in [0, n - 1]")
    return ForestProbTable(n, p_d).value(m, p)


def p0(n0: int, n: int, p_d):
    """Probability that n0 given voters all delegate among themselves."""
    if n0 == 0:
        return p_d * 0 + 1
    return (p_d * (n0 - 1) / (n - 1)) ** n0


def _four_way_sum(game: WeightedVotingGame, p_d, i: int, table: dict, forests: ForestProbTable, critical_only: bool):
    n = game.n
    W = game.total_weight
    wi = game.weights[i]
    vote = (1 - p_d) / 2
    vote_tab = forests.table(vote)
    follow_tab = forests.inner
    cyc = [p0(k, n, p_d) for k in range(n)]
    exact = isinstance(p_d, Fraction)
    terms = []
    for (n_plus, n_zero, n_fol, w_plus, w_zero, w_fol), count in table.items():
        if n_zero == 1:  # one voter cannot form a cycle
            continue
        if critical_only:
            turnout = W - w_zero
            if not (game.accepts(w_plus + wi + w_fol, turnout) and not game.accepts(w_plus, turnout)):
                continue
        n_minus = n - 1 - n_plus - n_zero - n_fol
        prob = vote_tab[n_plus] * vote_tab[n_minus] * follow_tab[n_fol] * cyc[n_zero]
        if prob:
            terms.append(count * prob if exact else float(count) * prob)
    return sum(terms, Fraction(0)) if exact else math.fsum(terms)


class LDSolver:
    """Measures for every voter of one game at one p_d.

    Voters with equal weight see the same multiset of other weights, so their
    count tables (and measures) coincide and are computed once.
    """

    def __init__(self, game: WeightedVotingGame, p_d, exact: bool = False):
        pd = as_fraction(p_d)
        if not 0 <= pd <= 1:
            raise ValueError("p_d must lie in [0, 1]")
        self.game = game
        self.exact = exact
        self.p_d = pd if exact else float(pd)
        self.forests = ForestProbTable(game.n, self.p_d)
        self._tables: dict = {}

    def count_table(self, i: int) -> dict:
        wi = self.game.weights[i]
        if wi not in self._tables:
            others = list(self.game.weights)
            del others[i]
            if self.p_d == 0:
                # nobody delegates: only supporters and opposers have positive probability
                two = partition_count_table(others, 2)
                self._tables[wi] = {(k[0], 0, 0, k[1], 0, 0): c for k, c in two.items()}
            else:
                # groups: supporters, cycle abstainers, followers; opposers take the rest
                self._tables[wi] = partition_count_table(others, 4)
        return self._tables[wi]

    def measure(self, i: int):
        if self.game.n == 1:
            return self.p_d * 0 + 1
        return _four_way_sum(self.game, self.p_d, i, self.count_table(i), self.forests, True)

    def normalization(self, i: int):
        if self.game.n == 1:
            return self.p_d * 0 + 1
        return _four_way_sum(self.game, self.p_d, i, self.count_table(i), self.forests, False)

    def measures(self) -> list:
        memo: dict = {}
        out = []
        for i, w in enumerate(self.game.weights):
            if w not in memo:
                memo[w] = self.measure(i)
            out.append(memo[w])
        return out


def ld_measure(game: WeightedVotingGame, p_d, i: int, exact: bool = False):
    return LDSolver(game, p_d, exact).measure(i)


def ld_measures(game: WeightedVotingGame, p_d, exact: bool = False) -> list:
    return LDSolver(game, p_d, exact).measures()


def ld_normalization(game: WeightedVotingGame, p_d, i: int, exact: bool = False):
    return LDSolver(game, p_d, exact).normalization(i)
