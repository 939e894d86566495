from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopeq import ExplicitGame, iterate_deletion, super_dominates
from coopeq.deletion import (coop_base, dominance_pairs, losers_and_quantities,
                             unplayable_first_type, unplayable_second_type)
from coopeq.game import TableAltruism, ThetaAltruism, fiber_game
from coopeq.generators import (bargaining, dictator, from_bimatrix, pd, sure, sure_gain,
                               traveler)


def two_by_two(cells, **kwargs):
    a = [[cells[0][0][0], cells[0][1][0]], [cells[1][0][0], cells[1][1][0]]]
    b = [[cells[0][0][1], cells[0][1][1]], [cells[1][0][1], cells[1][1][1]]]
    return from_bimatrix(["U", "D"], ["L", "R"], a, b, **kwargs)


def transfer_game(theta=Fraction(1, 5)):
    # row player's D moves one unit from the column player to the row player
    return two_by_two([[(0, 0), (0, 0)], [(1, -1), (1, -1)]], altruism=ThetaAltruism(theta))


def test_sure_gain_without_strict_dominance():
    g = sure_gain()
    assert super_dominates(g, 1, "L", "R") is False
    assert super_dominates(g, 1, "R", "L")
    assert dominance_pairs(g, 1) == [(1, 0)]
    assert dominance_pairs(g, 0) == []


def test_strict_dominance_without_super_domination():
    for g in (sure(), pd()):
        assert dominance_pairs(g, 0) == dominance_pairs(g, 1) == []
        assert not unplayable_first_type(g, 0)
        assert not iterate_deletion(g).removals


def test_dictator_offers_form_a_chain():
    g = dictator()
    pairs = set(dominance_pairs(g, 0))
    assert pairs == {(s, t) for s in range(11) for t in range(11) if s > t}
    assert all(super_dominates(g, 0, str(k + 1), str(k)) for k in range(10))


def test_coop_base_on_one_player_games():
    one = ExplicitGame([["U", "D"]], [[0, 1]])
    assert [p.pure_profile() for p in coop_base(one)] == [(1,)]
    flat = ExplicitGame([["a", "b", "c"]], [[2, 2, 2]])
    assert len(coop_base(flat)) == 3
    fiber = fiber_game(traveler(5), 1, "300")
    [best] = coop_base(fiber)
    assert fiber.labels[0][best.pure_profile()[0]] == "299"
    assert fiber.gain(0, best.pure_profile()) == 304


def test_losers_of_transfer_game():
    g = transfer_game()
    q = losers_and_quantities(g, 0, "U", "D")
    assert q.losers == [1]
    assert (q.loss, q.certain_gain, q.help[1], q.status_worse[1]) == (1, 1, 1, 0)
    assert q.status_better[1] == -1
    assert q.altruism[1] == g.altruism(1, 1, -1) == 0


def test_empty_losers_admit_first_type_deletion():
    g = two_by_two([[(1, 1), (1, 1)], [(1, 1), (2, 1)]])
    q = losers_and_quantities(g, 0, "U", "D")
    assert q.losers == []
    assert set(unplayable_first_type(g, 0)) == {0}


def test_transfer_game_first_type():
    assert set(unplayable_first_type(transfer_game(), 0)) == {0}
    assert not unplayable_second_type(transfer_game(), 0)


def test_altruism_threshold_flips_the_deleted_strategy():
    # with a(1, 1, -1) = 1 = P the row player gives up D instead
    generous = transfer_game(Fraction(1, 2))
    assert generous.altruism(1, 1, -1) == 1
    assert not unplayable_first_type(generous, 0)
    assert set(unplayable_second_type(generous, 0)) == {1}
    table = two_by_two([[(0, 0), (0, 0)], [(1, -1), (1, -1)]],
                       altruism=TableAltruism(((1, 1, -1, 1),)))
    assert set(unplayable_second_type(table, 0)) == {1}


def test_dictator_gives_up_small_offers():
    g = dictator()
    assert g.altruism(1, 10, 0) == 2
    first = unplayable_first_type(g, 0)
    assert set(first) == set(range(3, 11))
    second = unplayable_second_type(g, 0, playable=[0, 1, 2])
    assert set(second) == {0, 1}
    trace = iterate_deletion(g)
    assert trace.reduced.labels[0] == ("2",)


def test_two_round_reduction():
    g = sure_gain()
    trace = iterate_deletion(g)
    rounds = trace.rounds()
    assert trace.round_count == 2
    assert [(r.kind, r.player, r.strategy) for r in rounds[0]] == [("first", 1, "R")]
    assert [(r.kind, r.player, r.strategy) for r in rounds[1]] == [("first", 0, "U")]
    assert trace.reduced.labels == (("D",), ("L",))
    assert rounds[1][0].witness.altruism[1] == 0
    js = trace.to_json()
    assert js["playable"] == [["D"], ["L"]]
    assert js["rounds"][1]["removals"][0]["witness"]["P"] == 1


@pytest.mark.parametrize("bonus", [2, 5, 60, 180])
def test_traveler_has_no_super_domination(bonus):
    g = traveler(bonus)
    tab = g.table()[0]
    lo, hi = tab.min(axis=1), tab.max(axis=1)
    # every pair of rows overlaps, so nothing can be super-dominated
    assert all(hi[s] > lo[t] or lo[s] >= hi[t] for s in range(g.sizes[0])
               for t in range(g.sizes[0]) if s != t)
    assert not dominance_pairs(g, 0)
    assert not iterate_deletion(g).removals


def test_punishment_survives_deletion():
    g = traveler(2, 2, 100, punish=True)
    trace = iterate_deletion(g)
    assert not trace.removals
    assert trace.reduced.sizes == g.sizes


def test_bargaining_drops_empty_and_full_demands():
    # demanding nothing always pays 0; once the opponent never demands 0,
    # demanding everything always fails
    trace = iterate_deletion(bargaining(20))
    got = [(r.round, r.player, r.strategy) for r in trace.removals]
    assert got == [(1, 0, "0"), (1, 1, "0"), (1, 1, "20"), (2, 0, "20")]
    middle = [str(x) for x in range(1, 20)]
    assert trace.to_json()["playable"] == [middle, middle]


@st.composite
def small_games(draw):
    n = draw(st.integers(2, 3))
    sizes = [draw(st.integers(1, 3)) for _ in range(n)]
    count = n * int(np.prod(sizes))
    flat = draw(st.lists(st.integers(-4, 6), min_size=count, max_size=count))
    return ExplicitGame([[f"s{k}" for k in range(m)] for m in sizes],
                        np.array(flat, dtype=object).reshape([n] + sizes))


@settings(max_examples=60, deadline=None)
@given(g=small_games())
def test_deletion_terminates_and_is_idempotent(g):
    trace = iterate_deletion(g)
    assert trace.round_count <= sum(g.sizes)
    assert all(trace.playable)
    assert not iterate_deletion(trace.reduced).removals


@settings(max_examples=60, deadline=None)
@given(g=small_games())
def test_super_domination_is_a_strict_order(g):
    for i in range(g.player_count):
        pairs = set(dominance_pairs(g, i))
        assert all((s, s) not in pairs for s in range(g.sizes[i]))
        for s, t in pairs:
            assert (t, s) not in pairs
            for u in range(g.sizes[i]):
                if (t, u) in pairs:
                    assert (s, u) in pairs
