import random
from fractions import Fraction

import pytest

from liquidpower.core import VOTE_FOR, BehaviorModel, DelegationGraph, WeightedVotingGame, partition_probability, resolve_delegations
from liquidpower.ld_exact import ForestProbTable, LDSolver, ld_measure, ld_measures, ld_normalization, p0, pld
from liquidpower.oracle import banzhaf_classical, exact_measure_bruteforce

from reference import all_partitions

TABLE2_WEIGHTS = (3, 2, 2) + (1,) * 10


def forest_probability_by_enumeration(n, p_d, m):
    """Probability that voters 0..m-1 all resolve to + while delegating only among themselves."""
    g = DelegationGraph.complete(n)
    model = BehaviorModel.constant(g, p_d)
    members = set(range(m))
    total = Fraction(0)
    for d in all_partitions(g, model):
        acts = d.actions[:m]
        if any(not isinstance(a, str) and a not in members for a in acts):
            continue
        if any(a != VOTE_FOR for a in acts if isinstance(a, str)):
            continue
        if all(v > 0 for v in resolve_delegations(d, g).votes[:m]):
            total += partition_probability(d, g, model)
    return total


def test_forest_base_cases():
    for p in (Fraction(0), Fraction(1, 3), Fraction(1)):
        assert pld(0, p, 6, Fraction(1, 2)) == 1
        assert pld(1, p, 6, Fraction(1, 2)) == p


def test_forest_two_voters_by_hand():
    for n, p, pd in [(5, Fraction(3, 10), Fraction(1, 2)), (9, Fraction(1, 7), Fraction(4, 5))]:
        assert pld(2, p, n, pd) == p * (p + 2 * pd / (n - 1))
    assert pld(2, 0.3, 5, 0.5) == pytest.approx(0.165, abs=1e-12)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_forest_probability_matches_enumeration(m):
    n, pd = 5, Fraction(1, 2)
    assert pld(m, (1 - pd) / 2, n, pd) == forest_probability_by_enumeration(n, pd, m)


def test_forest_table_bounds():
    t = ForestProbTable(12, 0.7)
    for p in (0.15, t.step):
        assert all(0 <= v <= 1 for v in t.table(p))
    with pytest.raises(ValueError):
        pld(5, 0.2, 5, 0.5)


def test_cycle_probability():
    assert p0(1, 13, 0.9) == 0
    assert p0(0, 13, 0.9) == 1
    assert p0(2, 13, 0.9) == pytest.approx(0.005625, abs=1e-15)
    assert p0(3, 5, Fraction(1, 2)) == Fraction(1, 4) ** 3


@pytest.mark.parametrize(
    "p_d, expected",
    [(0, (0.511, 0.306, 0.148)), (0.5, (0.424, 0.308, 0.212)), (0.9, (0.696, 0.638, 0.568))],
)
def test_table2_values(p_d, expected):
    m = ld_measures(WeightedVotingGame(TABLE2_WEIGHTS), p_d)
    assert (m[0], m[1], m[3]) == pytest.approx(expected, abs=1e-3)


def test_no_delegation_equals_banzhaf():
    rng = random.Random(31)
    for _ in range(10):
        game = WeightedVotingGame(tuple(rng.randint(1, 7) for _ in range(rng.randint(1, 12))))
        assert ld_measures(game, 0, exact=True) == banzhaf_classical(game)
        assert ld_measures(game, 0.0) == pytest.approx([float(x) for x in banzhaf_classical(game)], abs=1e-9)


def test_matches_bruteforce_on_complete_graphs():
    rng = random.Random(37)
    cases = [(n, rng) for n in (2, 3, 4, 5, 6) for _ in range(3)] + [(7, rng)]
    for n, r in cases:
        game = WeightedVotingGame(tuple(r.randint(1, 4) for _ in range(n)), r.choice([Fraction(1, 2), Fraction(2, 3)]))
        pd = r.choice([Fraction(1, 5), Fraction(1, 2), Fraction(4, 5)])
        g = DelegationGraph.complete(n)
        rep = exact_measure_bruteforce(g, game, BehaviorModel.constant(g, pd))
        assert ld_measures(game, pd, exact=True) == list(rep.exact)
        assert ld_measures(game, float(pd)) == pytest.approx(rep.measure, abs=1e-9)


def test_full_delegation_matches_bruteforce():
    # every voter delegates; forcing i to vote makes i's block the whole turnout
    game = WeightedVotingGame((3, 1, 2, 1))
    g = DelegationGraph.complete(4)
    rep = exact_measure_bruteforce(g, game, BehaviorModel.constant(g, 1))
    assert list(rep.exact) == ld_measures(game, 1, exact=True) == [1] * 4


def test_normalization_exact_up_to_eight():
    rng = random.Random(41)
    for n in range(1, 9):
        game = WeightedVotingGame(tuple(rng.randint(1, 5) for _ in range(n)))
        pd = Fraction(rng.randint(0, 10), 10)
        for i in range(n):
            assert ld_normalization(game, pd, i, exact=True) == 1


def test_normalization_float_up_to_twenty():
    rng = random.Random(43)
    for n in (10, 15, 20):
        game = WeightedVotingGame(tuple(rng.randint(1, 4) for _ in range(n)))
        solver = LDSolver(game, 0.65)
        for i in (0, n // 2, n - 1):
            assert solver.normalization(i) == pytest.approx(1.0, abs=1e-10)


def test_equal_weights_get_identical_measures():
    game = WeightedVotingGame((4, 1, 2, 1, 4, 2, 1))
    solver = LDSolver(game, Fraction(3, 10), exact=True)
    m = [solver.measure(i) for i in range(game.n)]
    for i in range(game.n):
        for j in range(game.n):
            if game.weights[i] == game.weights[j]:
                assert m[i] == m[j]


def test_no_dummies_when_delegating():
    game = WeightedVotingGame((20, 1, 1, 1, 1))
    assert banzhaf_classical(game)[1] == 0
    for pd in (Fraction(1, 100), Fraction(1, 2), Fraction(99, 100)):
        assert all(x > 0 for x in ld_measures(game, pd, exact=True))


def test_measure_spread_narrows_with_delegation():
    game = WeightedVotingGame(TABLE2_WEIGHTS)
    spreads = [max(m) - min(m) for m in (ld_measures(game, pd) for pd in (0, 0.5, 0.9))]
    assert spreads[0] > spreads[1] > spreads[2] > 0


def test_single_voter_and_solver_agree():
    game = WeightedVotingGame(TABLE2_WEIGHTS)
    assert ld_measure(game, 0.5, 1) == pytest.approx(ld_measures(game, 0.5)[1], abs=0)
    assert ld_measures(WeightedVotingGame((5,)), 0.5) == [1.0]
    with pytest.raises(ValueError):
        LDSolver(game, 1.5)
