from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopeq import (CoalitionGame, CoalitionStructure, ExplicitGame, MixedProfile,
                    ValidationError, enumerate_coalition_structures, expected_gain)
from coopeq.game import bell_number, fiber_game, format_number, restrict, to_fraction
from coopeq.generators import bargaining, bertrand, dictator, pd, prisoner, sure_gain, traveler


def test_prisoner_pure_cooperation_gain():
    g = prisoner(1)
    assert expected_gain(g, MixedProfile.pure(g.sizes, (0, 0)), 0) == 2


def test_pure_profile_reads_table():
    g = traveler(5)
    for prof in [(0, 0), (20, 70), (120, 3)]:
        p = MixedProfile.pure(g.sizes, prof)
        assert expected_gain(g, p, 1) == g.gain(1, prof)


def test_cents_pd_half_half():
    g = pd()
    half = [Fraction(1, 2)] * 2
    p = MixedProfile([half, half])
    assert expected_gain(g, p, 0) == Fraction(1, 10)
    assert expected_gain(g, p, 1) == Fraction(1, 10)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)])
def test_structure_counts(n, count):
    found = enumerate_coalition_structures(n)
    assert len(found) == count == bell_number(n)
    assert len({p.blocks for p in found}) == count


def test_structure_order_starts_with_grand():
    found = enumerate_coalition_structures(3)
    assert found[0].is_grand and found[-1].is_selfish


def test_meet_is_common_refinement():
    a = CoalitionStructure(((0, 1), (2, 3)))
    b = CoalitionStructure(((0, 2), (1, 3)))
    assert a.meet(b) == CoalitionStructure.selfish(4)
    assert a.meet(CoalitionStructure.grand(4)) == a


def test_merged_prisoner_game():
    mu = Fraction(3)
    cg = CoalitionGame(prisoner(mu), CoalitionStructure.grand(2))
    view = cg.as_explicit()
    labels = view.labels[0]
    gains = {lab: view.gain(0, (k,)) for k, lab in enumerate(labels)}
    assert sorted(gains.values()) == [2, 2 + mu, 2 + mu, 2 + 2 * mu]


def test_merged_bargaining_points():
    g = bargaining()
    cg = CoalitionGame(g, CoalitionStructure.grand(2))
    assert cg.block_gain(0, (50, 50)) == 100
    assert cg.block_gain(0, (60, 60)) == 0


def test_selfish_merge_is_identity():
    g = prisoner(2)
    view = CoalitionGame(g, CoalitionStructure.selfish(2)).as_explicit()
    assert np.array_equal(view.table() * g.den, g.table() * view.den)


def test_fiber_of_sure_gain_column_l():
    g = sure_gain()
    f = fiber_game(g, 1, "L")
    assert f.player_count == 1
    assert [f.gain(0, (s,)) for s in range(2)] == [0, 1]


def test_fiber_of_dictator():
    g = dictator()
    f = fiber_game(g, 1, 0)
    assert [f.gain(0, (s,)) for s in range(11)] == [10 - x for x in range(11)]


def test_generator_spot_values():
    assert traveler(5).gain(0, (200 - 180, 250 - 180)) == 205
    g = prisoner(0)
    assert [g.gains_at(p) for p in [(0, 0), (0, 1), (1, 0), (1, 1)]] == \
        [(1, 1), (0, 2), (2, 0), (1, 1)]
    b = bertrand(2)
    top = b.sizes[0] - 1
    assert b.gains_at((top, top)) == (50, 50)


def test_number_parsing():
    assert to_fraction("0.15") == Fraction(3, 20)
    assert to_fraction("3/4") == Fraction(3, 4)
    assert format_number(Fraction(6, 3)) == 2
    assert format_number(Fraction(1, 3)) == "1/3"
    with pytest.raises(ValidationError):
        to_fraction("abc")
    with pytest.raises(ValidationError):
        to_fraction(True)


def test_profile_validation():
    with pytest.raises(ValidationError):
        MixedProfile([[Fraction(1, 2), Fraction(1, 3)]])
    with pytest.raises(ValidationError):
        MixedProfile([[2, -1]])
    g = prisoner(1)
    with pytest.raises(ValidationError):
        expected_gain(g, MixedProfile([[1, 0, 0], [1, 0]]), 0)


def test_game_validation():
    with pytest.raises(ValidationError):
        ExplicitGame([["a", "a"]], [[1, 2]])
    with pytest.raises(ValidationError):
        ExplicitGame([["a"], ["b"]], [[[1]]])


def test_restrict_keeps_gains():
    g = traveler(5)
    r = restrict(g, [[0, 5, 120], [1, 2]])
    assert r.labels == (("180", "185", "300"), ("181", "182"))
    assert r.gain(0, (2, 1)) == g.gain(0, (120, 2))


small = st.integers(min_value=1, max_value=3)


@st.composite
def games(draw, players=st.integers(2, 3)):
    n = draw(players)
    sizes = [draw(small) for _ in range(n)]
    count = n * int(np.prod(sizes))
    flat = draw(st.lists(st.integers(-6, 9), min_size=count, max_size=count))
    arr = np.array(flat, dtype=object).reshape([n] + sizes)
    return ExplicitGame([[f"s{k}" for k in range(m)] for m in sizes], arr)


@st.composite
def mixes(draw, size):
    w = draw(st.lists(st.integers(0, 5), min_size=size, max_size=size))
    if sum(w) == 0:
        w[0] = 1
    return [Fraction(x, sum(w)) for x in w]


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_expected_gain_is_affine_in_own_mix(data):
    g = data.draw(games())
    prof = MixedProfile([data.draw(mixes(n)) for n in g.sizes])
    a = data.draw(mixes(g.sizes[0]))
    b = data.draw(mixes(g.sizes[0]))
    for t in (Fraction(0), Fraction(1, 3), Fraction(1)):
        mix = [t * x + (1 - t) * y for x, y in zip(a, b)]
        lhs = expected_gain(g, prof.replace(0, mix), 1)
        rhs = t * expected_gain(g, prof.replace(0, a), 1) + \
            (1 - t) * expected_gain(g, prof.replace(0, b), 1)
        assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_merged_gains_preserve_totals(data):
    g = data.draw(games())
    for p in enumerate_coalition_structures(g.player_count):
        cg = CoalitionGame(g, p)
        for prof in g.pure_profiles():
            blocks = sum(cg.block_gain(a, prof) for a in range(cg.block_count))
            assert blocks == sum(g.gains_at(prof))


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_fiber_splices_fixed_strategy(data):
    g = data.draw(games())
    i = data.draw(st.integers(0, g.player_count - 1))
    s = data.draw(st.integers(0, g.sizes[i] - 1))
    f = fiber_game(g, i, s)
    rest = [data.draw(mixes(n)) for n in f.sizes]
    full = list(rest)
    full.insert(i, [Fraction(int(k == s)) for k in range(g.sizes[i])])
    others = [k for k in range(g.player_count) if k != i]
    for local, k in enumerate(others):
        assert expected_gain(f, MixedProfile(rest), local) == \
            expected_gain(g, MixedProfile(full), k)
