from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopeq import (CoalitionStructure, CptParams, ExplicitGame, MixedProfile, ValidationError,
                    analyze_structure, coalition_value, enumerate_coalition_structures)
from coopeq.cpt import Prospect, events_value, prospect_value, value_fn
from coopeq.generators import (asym_pennies, bargaining, bertrand, pd, prisoner, public_goods,
                               traveler, ultimatum)
from coopeq.valuation import (conditional_infimum, incentive, is_k_deviation,
                              max_joint_profiles, tau_singleton, tau_subset)

from oracles import grand_value_pure

GRAND = CoalitionStructure.grand(2)
SELFISH = CoalitionStructure.selfish(2)
IDENTITY = CptParams.identity()


def pure_labels(game, mj):
    return sorted(tuple(game.labels[i][s] for i, s in enumerate(p.pure_profile()))
                  for p in mj.profiles)


def test_traveler_b5_walkthrough():
    g = traveler(5)
    rep = analyze_structure(g, GRAND)
    assert pure_labels(g, rep.max_joint) == [("300", "300")]
    for dev in rep.deviations:
        assert (dev.incentive, dev.risk, dev.tau) == (4, 7, Fraction(4, 11))
    assert rep.events[0] == [((), 300, Fraction(7, 11)), ((1,), 290, Fraction(4, 11))]
    assert rep.values == [Fraction(3260, 11)] * 2


def test_traveler_risk_witness_is_298_against_299():
    g = traveler(5)
    dev = analyze_structure(g, GRAND).deviations[1]
    _, moved, counter = dev.risk_witness
    assert g.labels[1][moved] == "299"
    assert g.labels[0][counter[0]] == "298"


def test_k_deviation_examples():
    g = traveler(5)
    top = MixedProfile.pure(g.sizes, (120, 120))
    assert is_k_deviation(g, top, 1, 119)
    assert is_k_deviation(g, top, 1, 120)
    assert not is_k_deviation(g, top, 1, 0)
    u = ultimatum()
    zero_offer = MixedProfile.pure(u.sizes, (0, 0))
    assert is_k_deviation(u, zero_offer, 1, 1)


def test_incentive_zero_at_nash():
    g = traveler(5)
    rep = analyze_structure(g, SELFISH)
    assert all(d.incentive == 0 and d.tau == 0 for d in rep.deviations)


def test_bertrand_two_bidders():
    g = bertrand(2)
    rep = analyze_structure(g, GRAND)
    assert rep.deviations[0].incentive == 49
    assert rep.events[0][1][1] == 0
    assert rep.values == [Fraction(2500, 99)] * 2


def test_bertrand_four_bidders_no_deviation_probability():
    g = bertrand(4)
    rep = analyze_structure(g, CoalitionStructure.grand(4))
    taus = [d.tau for d in rep.deviations]
    # with four bidders the split is 25 and undercutting to 99 earns 99
    assert taus == [Fraction(74, 99)] * 4
    assert tau_subset(taus, 0, ()) == Fraction(25, 99) ** 3
    assert rep.values[0] == 25 * Fraction(25, 99) ** 3


def test_bertrand_binomial_identity_for_independent_deviators():
    t = Fraction(49, 99)
    expanded = 1 - 3 * t + 3 * t ** 2 - t ** 3
    assert tau_subset([t] * 4, 0, ()) == expanded == Fraction(50, 99) ** 3


def test_risk_and_tau_of_cents_pd():
    g = pd()
    rep = analyze_structure(g, GRAND)
    assert rep.deviations[1].risk == Fraction(1, 10)
    assert rep.values == [Fraction(1, 10)] * 2
    assert analyze_structure(g, SELFISH).values == [Fraction(1, 20)] * 2


def test_asymmetric_pennies_zero_risk():
    g = asym_pennies()
    rep = analyze_structure(g, GRAND)
    assert rep.deviations[1].risk == 0 and rep.deviations[1].tau == 1
    assert rep.values == [40, 40]


def test_bargaining_selfish_assembly():
    g = bargaining()
    mj = max_joint_profiles(g, SELFISH)
    assert pure_labels(g, mj) == [("100", "100")]
    assert analyze_structure(g, SELFISH).values == [0, 0]
    assert analyze_structure(g, GRAND).values == [50, 50]


def test_one_player_game_value_is_optimum():
    g = ExplicitGame([["a", "b", "c"]], [[3, 7, 7]])
    rep = analyze_structure(g, CoalitionStructure.grand(1))
    assert len(rep.max_joint) == 2 and rep.values == [7]


def test_ultimatum_values():
    assert analyze_structure(ultimatum(), GRAND).values == [5, Fraction(5, 2)]
    assert analyze_structure(ultimatum(scale=1), GRAND).values == [Fraction(1, 2),
                                                                    Fraction(1, 4)]


@pytest.mark.parametrize("mu", [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3),
                                Fraction(7, 2), Fraction(10)])
def test_prisoner_grand_value_is_mu(mu):
    g = prisoner(mu)
    assert coalition_value(g, GRAND, 0) == mu
    assert coalition_value(g, SELFISH, 0) == 1
    assert (coalition_value(g, GRAND, 0) > coalition_value(g, SELFISH, 0)) == (mu > 1)


@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(2, 3), Fraction(4, 5),
                                   Fraction(19, 20)])
def test_public_goods_closed_form(alpha):
    g = public_goods(2, alpha)
    rep = analyze_structure(g, GRAND)
    assert rep.deviations[0].tau == (1 - alpha) / alpha
    assert rep.events[0][1][1] == alpha
    assert rep.values == [3 * alpha - 1] * 2
    assert analyze_structure(g, SELFISH).values == [1, 1]


def test_public_goods_crossover_and_monotonicity():
    alphas = [Fraction(k, 40) for k in range(20, 41)]
    diffs = [coalition_value(public_goods(2, a, steps=20), GRAND, 0) - 1 for a in alphas]
    assert all(b > a for a, b in zip(diffs, diffs[1:]))
    assert coalition_value(public_goods(2, Fraction(2, 3)), GRAND, 0) == 1


@pytest.mark.parametrize("n", [3, 4])
def test_public_goods_n_player_events(n):
    alpha = Fraction(11, 20)
    rep = analyze_structure(public_goods(n, alpha, steps=4), CoalitionStructure.grand(n))
    t = (1 - alpha) / (alpha * (n - 1))
    assert all(d.tau == t for d in rep.deviations)
    for J, e, prob in rep.events[0]:
        assert e == alpha * (n - len(J))
        assert prob == t ** len(J) * (1 - t) ** (n - 1 - len(J))


def public_goods_events(n, alpha):
    """Grand-coalition events of one player, from the N-player closed form."""
    t = (1 - alpha) / (alpha * (n - 1))
    return [(alpha * (n - k), comb(n - 1, k) * t ** k * (1 - t) ** (n - 1 - k))
            for k in range(n)], t


def test_probability_floor_engages_for_large_groups():
    alpha = Fraction(11, 20)
    events10, t10 = public_goods_events(10, alpha)
    events30, t30 = public_goods_events(30, alpha)
    assert float(t10) == pytest.approx(0.0909, abs=1e-4) and t10 > Fraction(1, 20)
    assert float(t30) == pytest.approx(0.0282, abs=1e-4) and t30 < Fraction(1, 20)
    for events in (events10, events30):
        # the floor keeps the three likeliest events, renormalised
        kept = [(e, p) for e, p in events if p >= Fraction(1, 20)]
        assert len(kept) == 3
        mass = sum(p for _, p in kept)
        direct = prospect_value(Prospect((e, p / mass) for e, p in kept))
        assert events_value(events, floor=0.05) == pytest.approx(direct, abs=1e-12)
        assert events_value(events, floor=0.05) > events_value(events, floor=0.0)
        assert events_value(events, floor=0.05) < value_fn(events[0][0])


def test_identity_cpt_matches_eut_on_examples():
    games = [traveler(5), pd(), prisoner(2), bertrand(2), public_goods(2, "0.8"),
             bargaining(), ultimatum(), asym_pennies()]
    for g in games:
        for p in enumerate_coalition_structures(2):
            rep = analyze_structure(g, p)
            for i in range(2):
                assert abs(rep.value_cpt(i, IDENTITY) - float(rep.values[i])) <= 1e-9


def test_single_event_value():
    rep = analyze_structure(traveler(180), SELFISH)
    assert rep.value_cpt(0, CptParams()) == pytest.approx(value_fn(180))


def test_conditional_infimum_rejects_observer_in_group():
    g = traveler(5)
    mj = max_joint_profiles(g, GRAND)
    with pytest.raises(ValidationError):
        conditional_infimum(g, mj, 0, [0])


# ----- oracle comparisons --------------------------------------------------

def traveler_closed_form(b):
    return Fraction(300 * (b + 2) + (300 - 2 * b) * (b - 1), 2 * b + 1)


@pytest.mark.parametrize("bonus", [2, 3, 5, 17, 60, 119, 120])
def test_traveler_closed_form(bonus):
    assert coalition_value(traveler(bonus), GRAND, 0) == traveler_closed_form(bonus)


@settings(max_examples=25, deadline=None)
@given(bonus=st.integers(2, 179))
def test_traveler_matches_brute_force(bonus):
    g = traveler(bonus)
    ref = grand_value_pure(g)
    rep = analyze_structure(g, GRAND)
    assert [d.incentive for d in rep.deviations] == ref["D"]
    assert [d.risk for d in rep.deviations] == ref["R"]
    assert rep.values == ref["v"]
    if bonus <= 120:
        assert rep.values[0] == traveler_closed_form(bonus)


@pytest.mark.parametrize("make", [lambda: traveler(2, 2, 100), lambda: prisoner(3), pd,
                                  lambda: bertrand(2), lambda: traveler(150)])
def test_examples_match_brute_force(make):
    g = make()
    ref = grand_value_pure(g)
    rep = analyze_structure(g, GRAND)
    assert [d.tau for d in rep.deviations] == ref["tau"]
    assert [rep.events[i][1][1] for i in range(2)] == ref["e_dev"]
    assert rep.values == ref["v"]


# ----- properties ------------------------------------------------------------

@st.composite
def small_games(draw):
    n = draw(st.integers(2, 3))
    sizes = [draw(st.integers(1, 3)) for _ in range(n)]
    count = n * int(np.prod(sizes))
    flat = draw(st.lists(st.integers(-5, 9), min_size=count, max_size=count))
    return ExplicitGame([[f"s{k}" for k in range(m)] for m in sizes],
                        np.array(flat, dtype=object).reshape([n] + sizes))


@settings(max_examples=60, deadline=None)
@given(g=small_games())
def test_event_probabilities_sum_to_one(g):
    for p in enumerate_coalition_structures(g.player_count):
        rep = analyze_structure(g, p)
        for i in range(g.player_count):
            assert sum(t for _, _, t in rep.events[i]) == 1
        for d in rep.deviations:
            assert 0 <= d.tau <= 1
            assert (d.tau == 0) == (d.incentive == 0)
            assert (d.tau == 1) == (d.incentive > 0 and d.risk == 0)


@settings(max_examples=40, deadline=None)
@given(g=small_games(), data=st.data())
def test_incentive_and_risk_ignore_constant_shifts(g, data):
    shifts = [data.draw(st.integers(-4, 4)) for _ in range(g.player_count)]
    tab = np.array(g.table(), dtype=object)
    for k, c in enumerate(shifts):
        tab[k] = tab[k] + c * g.den
    h = ExplicitGame(g.labels, tab / g.den if g.den == 1 else
                     np.vectorize(lambda v: Fraction(int(v), g.den))(tab))
    p = CoalitionStructure.selfish(g.player_count)
    a, b = analyze_structure(g, p), analyze_structure(h, p)
    assert [(d.incentive, d.risk) for d in a.deviations] == \
        [(d.incentive, d.risk) for d in b.deviations]


@settings(max_examples=40, deadline=None)
@given(g=small_games())
def test_vectorised_and_loop_routes_agree(g):
    for p in enumerate_coalition_structures(g.player_count):
        mj = max_joint_profiles(g, p)
        for j in range(g.player_count):
            assert incentive(g, mj, j, vectorized=True)[0] == \
                incentive(g, mj, j, vectorized=False)[0]
            others = [k for k in range(g.player_count) if k != j]
            for r in range(len(others) + 1):
                for group in combinations(others, r):
                    assert conditional_infimum(g, mj, j, group, vectorized=True) == \
                        conditional_infimum(g, mj, j, group, vectorized=False)


def test_selfish_tau_is_zero():
    for g in (traveler(5), pd(), bargaining()):
        assert all(tau_singleton(g, SELFISH, j) == 0 for j in range(2))
