"""Built-in game families.

Every generator returns an :class:`ExplicitGame`. Families whose profile
space can get large (Bertrand, public goods) are built from a vectorised
formula so that slices can be evaluated without materialising the table.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import ValidationError
from .game import ExplicitGame, to_fraction

DENSE_BUILD_LIMIT = 2_000_000


def _lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _maybe_dense(game: ExplicitGame) -> ExplicitGame:
    if game.profile_count * game.player_count <= DENSE_BUILD_LIMIT:
        return ExplicitGame(game.labels, numerators=game.table(), den=game.den,
                            name=game.name, symmetric=game._symmetric_hint)
    return game


def from_bimatrix(rows, cols, row_gains, col_gains, name: str | None = None,
                  **kwargs) -> ExplicitGame:
    """Two-player game from row-player and column-player matrices."""
    a = np.asarray(row_gains, dtype=object)
    b = np.asarray(col_gains, dtype=object)
    _require(a.shape == (len(rows), len(cols)) and b.shape == a.shape,
             "bimatrix shapes do not match the strategy labels")
    return ExplicitGame([rows, cols], np.stack([a, b]), name=name, **kwargs)


def _pairs(cells):
    """Split a matrix of (row, col) gain pairs into two matrices."""
    return ([[c[0] for c in row] for row in cells], [[c[1] for c in row] for row in cells])


def prisoner(mu=1) -> ExplicitGame:
    mu = to_fraction(mu)
    _require(mu >= 0, "prisoner: mu must be nonnegative")
    a, b = _pairs([[(1 + mu, 1 + mu), (0, 2 + mu)], [(2 + mu, 0), (1, 1)]])
    return from_bimatrix(["C", "D"], ["C", "D"], a, b, name="prisoner", symmetric=True)


def pd(T="0.20", R="0.15", P="0.05", S=0) -> ExplicitGame:
    """Prisoner's dilemma with temptation, reward, punishment and sucker gains."""
    T, R, P, S = (to_fraction(x) for x in (T, R, P, S))
    _require(T > R > P >= S, "pd: need T > R > P >= S")
    a, b = _pairs([[(R, R), (S, T)], [(T, S), (P, P)]])
    return from_bimatrix(["C", "D"], ["C", "D"], a, b, name="pd", symmetric=True)


def traveler(bonus=5, lo=180, hi=300, punish: bool = False) -> ExplicitGame:
    bonus, lo, hi = int(bonus), int(lo), int(hi)
    _require(bonus >= 2, "traveler: bonus must be at least 2")
    _require(lo < hi, "traveler: need lo < hi")
    claims = np.arange(lo, hi + 1, dtype=np.int64)
    x = claims[:, None]
    y = claims[None, :]
    g1 = np.where(x < y, x + bonus, np.where(x == y, x, y - bonus))
    g2 = g1.T
    labels = [str(c) for c in claims]
    if punish:
        # P: 2 for the punisher; -96 for an opponent who claimed a number
        n = len(claims)
        big1 = np.full((n + 1, n + 1), 2, dtype=np.int64)
        big1[:n, :n] = g1
        big1[:n, n] = -96
        big2 = big1.T.copy()
        labels = labels + ["P"]
        return ExplicitGame([labels, labels], numerators=np.stack([big1, big2]),
                            name="traveler", symmetric=True)
    return ExplicitGame([labels, labels], numerators=np.stack([g1, g2]),
                        name="traveler", symmetric=True)


def bertrand(n=2, lo=2, hi=100) -> ExplicitGame:
    """Lowest bid wins its own bid; ties split the bid equally."""
    n, lo, hi = int(n), int(lo), int(hi)
    _require(n >= 1, "bertrand: need at least one player")
    _require(0 <= lo < hi, "bertrand: need 0 <= lo < hi")
    den = _lcm(*range(1, n + 1))
    bids = np.arange(lo, hi + 1, dtype=np.int64)

    def formula(grids):
        values = [bids[g] for g in grids]
        low = reduce(np.minimum, values)
        winners = reduce(np.add, [(v == low).astype(np.int64) for v in values])
        share = (low * den) // winners
        return np.stack([np.where(v == low, share, 0) for v in values])

    labels = [[str(b) for b in bids]] * n
    game = ExplicitGame(labels, formula=formula, den=den, key=("bertrand", n, lo, hi),
                        name="bertrand", symmetric=True)
    return _maybe_dense(game)


def public_goods(n=2, alpha="0.8", y=1, steps=100) -> ExplicitGame:
    """g_i = y - x_i + alpha * sum(x) on the contribution grid {k y / steps}."""
    n, steps = int(n), int(steps)
    alpha, y = to_fraction(alpha), to_fraction(y)
    _require(n >= 2, "public_goods: need at least two players")
    _require(Fraction(1, n) <= alpha <= 1, "public_goods: alpha must lie in [1/N, 1]")
    _require(y > 0 and steps >= 1, "public_goods: need y > 0 and steps >= 1")
    unit = y / steps
    den = _lcm(y.denominator, unit.denominator, (alpha * unit).denominator)
    base, own, shared = int(y * den), int(unit * den), int(alpha * unit * den)

    def formula(grids):
        total = reduce(np.add, [np.asarray(g, dtype=np.int64) for g in grids])
        return np.stack([base - own * np.asarray(g, dtype=np.int64) + shared * total
                         for g in grids])

    def label(k):
        x = k * unit
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    labels = [[label(k) for k in range(steps + 1)]] * n
    game = ExplicitGame(labels, formula=formula, den=den,
                        key=("public_goods", n, str(alpha), str(y), steps),
                        name="public_goods", symmetric=True)
    return _maybe_dense(game)


def bargaining(total=100) -> ExplicitGame:
    total = int(total)
    _require(total >= 1, "bargaining: total must be positive")
    s = np.arange(total + 1, dtype=np.int64)
    ok = (s[:, None] + s[None, :]) <= total
    g1 = np.where(ok, s[:, None], 0)
    g2 = np.where(ok, s[None, :], 0)
    labels = [str(v) for v in s]
    return ExplicitGame([labels, labels], numerators=np.stack([g1, g2]),
                        name="bargaining", symmetric=True)


def ultimatum(scale=10, steps=10) -> ExplicitGame:
    """Proposer offers s in {k scale / steps}; responder accepts (A) or rejects (R)."""
    scale, steps = to_fraction(scale), int(steps)
    _require(scale > 0 and steps >= 1, "ultimatum: need scale > 0 and steps >= 1")
    offers = [k * scale / steps for k in range(steps + 1)]
    g1 = [[scale - s, 0] for s in offers]
    g2 = [[s, 0] for s in offers]
    labels = [str(s.numerator) if s.denominator == 1 else f"{s.numerator}/{s.denominator}"
              for s in offers]
    return from_bimatrix(labels, ["A", "R"], g1, g2, name="ultimatum")


def dictator(k=1, y=10, z=0) -> ExplicitGame:
    """Proposer transfers x of y; the responder, holding z, receives floor(k x)."""
    k, y, z = to_fraction(k), int(y), int(z)
    _require(k > 0, "dictator: k must be positive")
    _require(y >= 0, "dictator: endowment y must be a natural number")
    g1 = [[y - x] for x in range(y + 1)]
    g2 = [[z + math.floor(k * x)] for x in range(y + 1)]
    return from_bimatrix([str(x) for x in range(y + 1)], ["A"], g1, g2, name="dictator")


def asym_pennies() -> ExplicitGame:
    a, b = _pairs([[(320, 40), (40, 80)], [(40, 80), (80, 40)]])
    return from_bimatrix(["U", "D"], ["L", "R"], a, b, name="asym_pennies")


def matching_pennies() -> ExplicitGame:
    a, b = _pairs([[(1, -1), (-1, 1)], [(-1, 1), (1, -1)]])
    return from_bimatrix(["H", "T"], ["H", "T"], a, b, name="matching_pennies")


def battle_of_sexes() -> ExplicitGame:
    a, b = _pairs([[(2, 1), (0, 0)], [(0, 0), (1, 2)]])
    return from_bimatrix(["A", "B"], ["A", "B"], a, b, name="battle_of_sexes")


def halpern(x=10, y=9) -> ExplicitGame:
    """Coordination game with a safe third action worth y against anything."""
    x, y = to_fraction(x), to_fraction(y)
    _require(x > y > 0, "halpern: need x > y > 0")
    a, b = _pairs([[(x, x), (0, 0), (0, y)],
                   [(0, 0), (x, x), (0, y)],
                   [(y, 0), (y, 0), (y, y)]])
    return from_bimatrix(["a", "b", "c"], ["a", "b", "c"], a, b, name="halpern",
                         symmetric=True)


def sure() -> ExplicitGame:
    """Prisoner's dilemma with strict dominance but no super-domination."""
    a, b = _pairs([[(2, 2), (0, 3)], [(3, 0), (1, 1)]])
    return from_bimatrix(["U", "D"], ["L", "R"], a, b, name="sure")


def sure_gain() -> ExplicitGame:
    """Zero-sum game in which L super-dominates R without strictly dominating it."""
    a, b = _pairs([[(0, 0), (10, -10)], [(1, -1), (1, -1)]])
    return from_bimatrix(["U", "D"], ["L", "R"], a, b, name="sure_gain")


# name -> (builder, {param: parser})
FAMILIES = {
    "prisoner": (prisoner, {"mu": to_fraction}),
    "pd": (pd, {"T": to_fraction, "R": to_fraction, "P": to_fraction, "S": to_fraction}),
    "traveler": (traveler, {"bonus": int, "lo": int, "hi": int, "punish": bool}),
    "bertrand": (bertrand, {"n": int, "lo": int, "hi": int}),
    "public_goods": (public_goods, {"n": int, "alpha": to_fraction, "y": to_fraction,
                                    "steps": int}),
    "bargaining": (bargaining, {"total": int}),
    "ultimatum": (ultimatum, {"scale": to_fraction, "steps": int}),
    "dictator": (dictator, {"k": to_fraction, "y": int, "z": int}),
    "asym_pennies": (asym_pennies, {}),
    "matching_pennies": (matching_pennies, {}),
    "battle_of_sexes": (battle_of_sexes, {}),
    "halpern": (halpern, {"x": to_fraction, "y": to_fraction}),
    "sure": (sure, {}),
    "sure_gain": (sure_gain, {}),
}


def make_standard_game(name: str, **params) -> ExplicitGame:
    try:
        builder, spec = FAMILIES[name]
    except KeyError:
        raise ValidationError(
            f"unknown game family {name!r}; choose from {', '.join(FAMILIES)}") from None
    unknown = set(params) - set(spec)
    if unknown:
        raise ValidationError(f"{name}: unknown parameter(s) {', '.join(sorted(unknown))}")
    parsed = {}
    for key, value in params.items():
        if value is None:
            continue
        try:
            parsed[key] = spec[key](value)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{name}: bad value for {key}: {value!r}") from exc
    return builder(**parsed)
