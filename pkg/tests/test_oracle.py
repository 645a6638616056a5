import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from liquidpower.core import BehaviorModel, DelegationGraph, WeightedVotingGame
from liquidpower.oracle import (
    EnumerationBudgetExceeded,
    banzhaf_classical,
    criticality_split_bruteforce,
    enumerate_range,
    exact_measure_bruteforce,
    partition_count,
    pvr_measure_bruteforce,
    tally_to_fractions,
)

from reference import TABLE_WEIGHTS, example1_graph, naive_measures, random_game, random_graph, random_model


def naive_banzhaf(game):
    """Banzhaf by listing every profile of the other voters."""
    n, w = game.n, game.weights
    out = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        swings = 0
        for bits in itertools.product((0, 1), repeat=len(others)):
            s = sum(w[j] for j, b in zip(others, bits) if b)
            if game.accepts(s + w[i], sum(w)) and not game.accepts(s, sum(w)):
                swings += 1
        out.append(Fraction(swings, 2 ** len(others)))
    return out


def test_three_voter_majority():
    g = DelegationGraph.empty(3)
    rep = exact_measure_bruteforce(g, WeightedVotingGame((1, 1, 1)), BehaviorModel.global_uniformity(g))
    assert rep.exact == (Fraction(1, 2),) * 3
    assert rep.engine == "brute"


def test_lone_voter_is_always_critical():
    g = DelegationGraph.empty(1)
    rep = exact_measure_bruteforce(g, WeightedVotingGame((4,)), BehaviorModel.global_uniformity(g))
    assert rep.exact == (Fraction(1),)


def test_example1_restricted_to_abde():
    keep = [0, 1, 3, 4]  # a, b, d, e
    full = example1_graph()
    pos = {v: k for k, v in enumerate(keep)}
    edges = [(pos[u], pos[v]) for u, v in full.edges() if u in pos and v in pos]
    g = DelegationGraph.from_edges(4, edges)
    assert sorted(edges) == [(0, 1), (0, 3), (2, 0), (2, 3), (3, 1)]
    game = WeightedVotingGame(tuple(TABLE_WEIGHTS[i] for i in keep), Fraction(1, 2))
    model = BehaviorModel.global_uniformity(g)
    rep = exact_measure_bruteforce(g, game, model)
    meas, pos_c, neg_c = naive_measures(g, game, model)
    assert list(rep.exact) == meas
    # b has no out-neighbour, so it is critical exactly when the others leave it pivotal
    assert rep.positive[1] == pytest.approx(rep.negative[1])


def test_matches_naive_reference_on_random_instances():
    rng = random.Random(11)
    for _ in range(25):
        n = rng.randint(1, 5)
        g = random_graph(rng, n, max_out=2)
        game = random_game(rng, n, max_weight=5)
        model = random_model(rng, g)
        rep = exact_measure_bruteforce(g, game, model)
        meas, pos, neg = naive_measures(g, game, model)
        assert list(rep.exact) == meas
        assert rep.positive == pytest.approx([float(x) for x in pos], abs=0)
        assert rep.negative == pytest.approx([float(x) for x in neg], abs=0)


def test_measure_splits_exactly_into_positive_and_negative():
    rng = random.Random(3)
    for _ in range(10):
        n = rng.randint(2, 5)
        g = random_graph(rng, n, max_out=3, density=0.7)
        game = random_game(rng, n)
        model = BehaviorModel.global_uniformity(g)
        tally = enumerate_range(g, game, model)
        meas, pos, neg = tally_to_fractions(tally, g, model)
        assert all(m == p + q for m, p, q in zip(meas, pos, neg))
        assert all(0 <= m <= 1 for m in meas)


def test_no_delegation_reduces_to_banzhaf():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(1, 6)
        g = random_graph(rng, n, max_out=3)
        game = random_game(rng, n)
        rep = exact_measure_bruteforce(g, game, BehaviorModel.constant(g, 0))
        assert list(rep.exact) == banzhaf_classical(game) == naive_banzhaf(game)


def test_banzhaf_dp_on_known_games():
    game = WeightedVotingGame(TABLE_WEIGHTS, Fraction(1, 2))
    b = banzhaf_classical(game)
    assert (b[0], b[1], b[2]) == (Fraction(1047, 2048), Fraction(627, 2048), Fraction(303, 2048))
    assert banzhaf_classical(WeightedVotingGame((1, 1, 1))) == [Fraction(1, 2)] * 3


def test_scaling_weights_leaves_measure_unchanged():
    rng = random.Random(8)
    for _ in range(8):
        n = rng.randint(2, 5)
        g = random_graph(rng, n)
        game = random_game(rng, n, max_weight=4)
        scaled = WeightedVotingGame(tuple(3 * w for w in game.weights), game.quota)
        model = random_model(rng, g)
        assert exact_measure_bruteforce(g, game, model).exact == exact_measure_bruteforce(g, scaled, model).exact


def test_voter_without_out_neighbours_splits_evenly():
    rng = random.Random(21)
    for _ in range(10):
        n = rng.randint(2, 5)
        g = random_graph(rng, n, density=0.6)
        game = random_game(rng, n)
        model = random_model(rng, g)
        meas, pos, neg = tally_to_fractions(enumerate_range(g, game, model), g, model)
        for i in range(n):
            if g.out_degree(i) == 0:
                assert pos[i] == neg[i] == meas[i] / 2


def test_dictator_split_is_half_half():
    g = DelegationGraph.from_edges(3, [(1, 0), (2, 1)])
    game = WeightedVotingGame((10, 1, 1), Fraction(1, 2))
    pos, neg = criticality_split_bruteforce(g, game, BehaviorModel.global_uniformity(g), 0)
    assert pos == neg == Fraction(1, 2)


def test_near_unanimity_favours_positive_criticality():
    g = DelegationGraph.complete(3)
    game = WeightedVotingGame((1, 1, 1), Fraction(99, 100))
    model = BehaviorModel.global_uniformity(g)
    for i in range(3):
        pos, neg = criticality_split_bruteforce(g, game, model, i)
        assert pos >= neg


def test_budget_refusal_reports_count():
    g = DelegationGraph.complete(6)
    model = BehaviorModel.global_uniformity(g)
    assert partition_count(g, model) == 7**6
    with pytest.raises(EnumerationBudgetExceeded) as err:
        exact_measure_bruteforce(g, WeightedVotingGame((1,) * 6), model, budget=1000)
    assert err.value.count == 7**6
    assert "117649" in str(err.value)


def test_zero_probability_actions_are_skipped():
    g = DelegationGraph.complete(3)
    model = BehaviorModel.constant(g, 1)
    assert partition_count(g, model) == 2**3
    assert partition_count(g) == 4**3


def test_split_ranges_merge_to_full_tally():
    rng = random.Random(4)
    g = random_graph(rng, 5, max_out=2, density=0.9)
    game = random_game(rng, 5)
    model = BehaviorModel.global_uniformity(g)
    whole = enumerate_range(g, game, model)
    cut = whole.stop // 3
    parts = enumerate_range(g, game, model, 0, cut).merge(enumerate_range(g, game, model, cut, whole.stop))
    assert np.array_equal(parts.counts, whole.counts)
    assert (parts.start, parts.stop) == (0, whole.stop)


def test_restricted_proxy_oracle_small_case():
    assert pvr_measure_bruteforce(WeightedVotingGame((1, 1, 1)), [0, 1]) == [Fraction(1, 2)] * 3


def test_restricted_proxy_oracle_matches_general_oracle_at_full_delegation():
    # with p_d = 1 delegators must delegate; delegatees always vote
    game = WeightedVotingGame((2, 1, 1, 1, 3), Fraction(1, 2))
    vv = [0, 4]
    g = DelegationGraph.bipartite(5, vv)
    rep = exact_measure_bruteforce(g, game, BehaviorModel.constant(g, 1))
    restricted = pvr_measure_bruteforce(game, vv)
    for i in vv:
        assert rep.exact[i] == restricted[i]
