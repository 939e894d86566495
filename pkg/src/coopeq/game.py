"""Games in explicit form, mixed profiles, coalition structures and the
merged games they induce.

Gains are kept as integer numerators over one common denominator so that
all expected-utility arithmetic stays exact. Small games store a dense
table of shape ``(N, |S_1|, ..., |S_N|)``; large generated games instead
carry a vectorised formula that is evaluated on index grids on demand.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .cpt import CptParams, value_fn
from .errors import CapacityError, ValidationError

DENSE_LIMIT = 50_000_000
PARTITION_CAP = 8
INT64_SAFE = 2**62

Formula = Callable[[tuple], np.ndarray]


def to_fraction(x) -> Fraction:
    """Parse an int, Fraction, decimal string, "p/q" string or float."""
    if isinstance(x, bool):
        raise ValidationError(f"boolean is not a number: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValidationError(f"non-finite number {x!r}")
        return Fraction(repr(x))
    if isinstance(x, np.integer):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse number {x!r}") from exc
    raise ValidationError(f"unsupported number type {type(x).__name__}: {x!r}")


def format_number(x) -> int | str:
    """Integers stay integers; other rationals become "p/q"."""
    x = Fraction(x)
    if x.denominator == 1:
        return int(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _int_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    flat = [abs(int(v)) for v in arr.ravel()] or [0]
    if max(flat) < INT64_SAFE:
        return arr.astype(np.int64)
    return arr


# ---------------------------------------------------------------------------
# altruism and fairness handles


def round_half_up(x) -> int:
    x = Fraction(x)
    # floor(x + 1/2) for x >= 0, mirrored for negatives
    if x >= 0:
        return math.floor(x + Fraction(1, 2))
    return -math.floor(-x + Fraction(1, 2))


@dataclass(frozen=True)
class ThetaAltruism:
    """a(k, y, z) = clamp(round(theta * y), 0, y); k and z are ignored."""

    theta: Fraction = Fraction(1, 5)

    def __call__(self, k, y, z) -> int:
        return max(0, min(round_half_up(Fraction(self.theta) * Fraction(y)), int(math.floor(y))))

    def to_json(self) -> dict:
        return {"theta": format_number(self.theta)}


@dataclass(frozen=True)
class TableAltruism:
    """Explicit lookup of measured dictator-game offers with a theta fallback."""

    entries: tuple = ()
    fallback: ThetaAltruism = ThetaAltruism()

    def __call__(self, k, y, z) -> int:
        key = (Fraction(k), Fraction(y), Fraction(z))
        for ek, ey, ez, value in self.entries:
            if (ek, ey, ez) == key:
                return value
        return self.fallback(k, y, z)

    def to_json(self) -> dict:
        out = self.fallback.to_json()
        out["table"] = [
            {"k": format_number(k), "y": format_number(y), "z": format_number(z), "value": v}
            for k, y, z, v in self.entries
        ]
        return out


DEFAULT_ALTRUISM = ThetaAltruism()


@dataclass(frozen=True)
class Fairness:
    """f(x, y) = v(x) - v(y) for the CPT value function, or x - y."""

    kind: str = "cpt"
    params: CptParams = CptParams()

    def __post_init__(self):
        if self.kind not in ("cpt", "linear"):
            raise ValidationError(f"unknown fairness kind {self.kind!r}")

    def __call__(self, x, y) -> float:
        if self.kind == "linear":
            return float(Fraction(x) - Fraction(y))
        return value_fn(x, self.params) - value_fn(y, self.params)

    def to_json(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear"}
        return {"kind": "cpt", "alpha": self.params.alpha, "beta": self.params.beta,
                "lambda": self.params.lam}


DEFAULT_FAIRNESS = Fairness()


def check_fairness(f, samples: Iterable = range(-20, 21, 3)) -> None:
    pts = [Fraction(s) for s in samples]
    for x in pts:
        if abs(f(x, x)) > 1e-12:
            raise ValidationError(f"fairness f(x, x) != 0 at x={x}")
        for y in pts:
            if x > y and not f(x, y) > 0:
                raise ValidationError(f"fairness f({x}, {y}) is not positive")


def check_altruism(a, samples: Iterable = range(0, 30, 4)) -> None:
    for y in samples:
        for k in (Fraction(1, 2), Fraction(1), Fraction(3)):
            for z in (-2, 0, 5):
                if a(k, y, z) > y:
                    raise ValidationError(f"altruism a({k}, {y}, {z}) exceeds the endowment")


# ---------------------------------------------------------------------------
# the game


class ExplicitGame:
    """A finite N-player game with exact rational gains."""

    def __init__(self, labels: Sequence[Sequence[str]], gains=None, *,
                 numerators: np.ndarray | None = None, den: int = 1,
                 formula: Formula | None = None, key=None,
                 altruism=DEFAULT_ALTRUISM, fairness=DEFAULT_FAIRNESS,
                 name: str | None = None, symmetric: bool | None = None):
        self.labels = tuple(tuple(str(s) for s in row) for row in labels)
        if not self.labels:
            raise ValidationError("a game needs at least one player")
        for i, row in enumerate(self.labels):
            if not row:
                raise ValidationError(f"player {i + 1} has an empty strategy set")
            if len(set(row)) != len(row):
                raise ValidationError(f"player {i + 1} has duplicate strategy labels")
        self.sizes = tuple(len(row) for row in self.labels)
        self.player_count = len(self.labels)
        self.altruism = altruism
        self.fairness = fairness
        self.name = name
        self._symmetric_hint = symmetric
        self._formula = None
        self._table = None
        self._key = key
        shape = (self.player_count,) + self.sizes

        if gains is not None:
            arr = np.asarray(gains, dtype=object)
            if arr.shape != shape:
                raise ValidationError(f"gains have shape {arr.shape}, expected {shape}")
            fracs = [to_fraction(g) for g in arr.ravel()]
            den = 1
            for f in fracs:
                den = den * f.denominator // math.gcd(den, f.denominator)
            nums = [f.numerator * (den // f.denominator) for f in fracs]
            self._table = _int_array(nums).reshape(shape)
            self.den = den
        elif numerators is not None:
            nums = np.asarray(numerators)
            if nums.shape != shape:
                raise ValidationError(f"gains have shape {nums.shape}, expected {shape}")
            self._table = nums if nums.dtype != object else _int_array(nums)
            self.den = int(den)
        elif formula is not None:
            self._formula = formula
            self.den = int(den)
            if key is None:
                raise ValidationError("formula games need a key")
        else:
            raise ValidationError("gains are missing")
        if self.den <= 0:
            raise ValidationError("denominator must be positive")

    # -- storage ------------------------------------------------------------

    @property
    def profile_count(self) -> int:
        return math.prod(self.sizes)

    @property
    def is_dense(self) -> bool:
        return self._table is not None

    def table(self) -> np.ndarray:
        """Dense numerator table; materialised lazily for formula games."""
        if self._table is None:
            total = self.profile_count * self.player_count
            if total > DENSE_LIMIT:
                raise CapacityError(
                    f"game has {total} gain entries, above the dense limit {DENSE_LIMIT}")
            self._table = self.numerators_on([range(n) for n in self.sizes])
        return self._table

    def numerators_on(self, index_lists: Sequence[Sequence[int]]) -> np.ndarray:
        """Numerators on the product of the given per-player index lists,
        shape ``(N, len(l_1), ..., len(l_N))``."""
        lists = [np.asarray(list(l), dtype=np.int64) for l in index_lists]
        if self._table is not None:
            return self._table[(slice(None),) + np.ix_(*lists)]
        grids = np.ix_(*lists)
        out = self._formula(grids)
        shape = (self.player_count,) + tuple(len(l) for l in lists)
        return np.broadcast_to(out, shape)

    def gain(self, player: int, profile: Sequence[int]) -> Fraction:
        nums = self.numerators_on([[s] for s in profile])
        return Fraction(int(nums[(player,) + (0,) * self.player_count]), self.den)

    def gains_at(self, profile: Sequence[int]) -> tuple:
        nums = self.numerators_on([[s] for s in profile])
        return tuple(Fraction(int(nums[(i,) + (0,) * self.player_count]), self.den)
                     for i in range(self.player_count))

    def gains_fraction(self) -> np.ndarray:
        t = self.table()
        out = np.empty(t.shape, dtype=object)
        for idx, v in np.ndenumerate(t):
            out[idx] = Fraction(int(v), self.den)
        return out

    def gains_float(self) -> np.ndarray:
        return self.table().astype(float) / self.den

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(repr(self.labels).encode())
        h.update(str(self.den).encode())
        if self._table is not None:
            t = self._table
            h.update(t.tobytes() if t.dtype != object else repr(t.tolist()).encode())
        else:
            h.update(repr(self._key).encode())
        return h.hexdigest()

    # -- lookups -----------------------------------------------------------

    def strategy_index(self, player: int, strategy) -> int:
        if isinstance(strategy, (int, np.integer)) and not isinstance(strategy, bool):
            if 0 <= strategy < self.sizes[player]:
                return int(strategy)
            raise ValidationError(f"player {player + 1} has no strategy index {strategy}")
        try:
            return self.labels[player].index(str(strategy))
        except ValueError:
            raise ValidationError(
                f"player {player + 1} has no strategy labelled {strategy!r}") from None

    def check_player(self, player: int) -> None:
        if not 0 <= player < self.player_count:
            raise ValidationError(f"no player {player + 1} in a {self.player_count}-player game")

    def fairness_for(self, player: int):
        if isinstance(self.fairness, (list, tuple)):
            return self.fairness[player]
        return self.fairness

    def pure_profiles(self) -> Iterable[tuple]:
        return itertools.product(*(range(n) for n in self.sizes))

    def with_handles(self, altruism=None, fairness=None) -> "ExplicitGame":
        clone = object.__new__(ExplicitGame)
        clone.__dict__.update(self.__dict__)
        if altruism is not None:
            clone.altruism = altruism
        if fairness is not None:
            clone.fairness = fairness
        return clone

    def is_symmetric(self) -> bool:
        if self._symmetric_hint is not None:
            return self._symmetric_hint
        n = self.player_count
        if len(set(self.sizes)) != 1 or len(set(self.labels)) != 1:
            return False
        if n == 1:
            return True
        t = self.table()
        for a in range(n - 1):
            b = a + 1
            for j in range(n):
                image = b if j == a else a if j == b else j
                if not np.array_equal(t[image], np.swapaxes(t[j], a, b)):
                    return False
        return True

    def __repr__(self):
        name = f" {self.name}" if self.name else ""
        return f"<ExplicitGame{name} {'x'.join(map(str, self.sizes))}>"


# ---------------------------------------------------------------------------
# derived games


def restrict(game: ExplicitGame, keep: Sequence[Sequence[int]]) -> ExplicitGame:
    """Subgame on the given per-player strategy indices (order preserved)."""
    keep = [sorted(set(int(s) for s in k)) for k in keep]
    if len(keep) != game.player_count:
        raise ValidationError("restriction needs one index list per player")
    for i, k in enumerate(keep):
        if not k:
            raise ValidationError(f"restriction leaves player {i + 1} without strategies")
        game.strategy_index(i, k[-1])
    labels = [[game.labels[i][s] for s in k] for i, k in enumerate(keep)]
    common = dict(altruism=game.altruism, fairness=game.fairness,
                  name=game.name, symmetric=None)
    if game.is_dense:
        return ExplicitGame(labels, numerators=game.numerators_on(keep), den=game.den, **common)
    maps = [np.asarray(k, dtype=np.int64) for k in keep]
    parent = game._formula

    def formula(grids):
        return parent(tuple(m[g] for m, g in zip(maps, grids)))

    return ExplicitGame(labels, formula=formula, den=game.den,
                        key=("restrict", game._key, tuple(map(tuple, keep))), **common)


def fiber_game(game: ExplicitGame, player: int, strategy) -> ExplicitGame:
    """(N-1)-player game obtained by freezing ``player`` on ``strategy``."""
    game.check_player(player)
    if game.player_count == 1:
        raise ValidationError("cannot fix the only player of a one-player game")
    s = game.strategy_index(player, strategy)
    others = [k for k in range(game.player_count) if k != player]
    labels = [game.labels[k] for k in others]
    fairness = game.fairness
    if isinstance(fairness, (list, tuple)):
        fairness = [fairness[k] for k in others]
    common = dict(altruism=game.altruism, fairness=fairness, name=None)
    if game.is_dense:
        nums = np.take(game.table(), s, axis=player + 1)[others]
        return ExplicitGame(labels, numerators=nums, den=game.den, **common)
    parent = game._formula

    def formula(grids):
        full = list(grids)
        full.insert(player, np.full((1,) * len(grids), s, dtype=np.int64))
        out = parent(tuple(full))
        return out[others]

    return ExplicitGame(labels, formula=formula, den=game.den,
                        key=("fiber", game._key, player, s), **common)


# ---------------------------------------------------------------------------
# mixed profiles


class MixedProfile:
    """Independent mixed strategies, one probability vector per player."""

    __slots__ = ("vectors",)

    def __init__(self, vectors: Sequence[Sequence]):
        vecs = []
        for i, v in enumerate(vectors):
            row = []
            for w in v:
                if isinstance(w, (float, np.floating)):
                    row.append(float(w))
                else:
                    row.append(to_fraction(w))
            vecs.append(tuple(row))
        self.vectors = tuple(vecs)
        for i, v in enumerate(self.vectors):
            if not v:
                raise ValidationError(f"player {i + 1} has an empty mixed strategy")
            if any(w < 0 for w in v):
                raise ValidationError(f"player {i + 1} has a negative probability")
            total = sum(v)
            if isinstance(total, Fraction):
                if total != 1:
                    raise ValidationError(f"player {i + 1}'s probabilities sum to {total}")
            elif abs(total - 1) > 1e-9:
                raise ValidationError(f"player {i + 1}'s probabilities sum to {total}")

    @classmethod
    def pure(cls, sizes: Sequence[int], profile: Sequence[int]) -> "MixedProfile":
        return cls([[1 if s == t else 0 for t in range(n)] for n, s in zip(sizes, profile)])

    @classmethod
    def uniform(cls, sizes: Sequence[int]) -> "MixedProfile":
        return cls([[Fraction(1, n)] * n for n in sizes])

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Fraction) for v in self.vectors for w in v)

    @property
    def is_pure(self) -> bool:
        return all(sum(1 for w in v if w > 0) == 1 for v in self.vectors)

    def pure_profile(self) -> tuple | None:
        if not self.is_pure:
            return None
        return tuple(next(s for s, w in enumerate(v) if w > 0) for v in self.vectors)

    def support(self, player: int) -> list:
        return [(s, w) for s, w in enumerate(self.vectors[player]) if w > 0]

    def replace(self, player: int, vector: Sequence) -> "MixedProfile":
        vecs = list(self.vectors)
        vecs[player] = tuple(vector)
        return MixedProfile(vecs)

    def replace_pure(self, player: int, strategy: int) -> "MixedProfile":
        n = len(self.vectors[player])
        return self.replace(player, [1 if t == strategy else 0 for t in range(n)])

    def validate(self, game: ExplicitGame) -> None:
        if len(self.vectors) != game.player_count:
            raise ValidationError(
                f"profile has {len(self.vectors)} players, game has {game.player_count}")
        for i, (v, n) in enumerate(zip(self.vectors, game.sizes)):
            if len(v) != n:
                raise ValidationError(
                    f"player {i + 1}: profile has {len(v)} entries, game has {n} strategies")

    def as_float(self) -> list[np.ndarray]:
        return [np.array([float(w) for w in v]) for v in self.vectors]

    def __eq__(self, other):
        return isinstance(other, MixedProfile) and self.vectors == other.vectors

    def __hash__(self):
        return hash(self.vectors)

    def __repr__(self):
        parts = []
        for v in self.vectors:
            parts.append("[" + ", ".join(str(w) for w in v) + "]")
        return "MixedProfile(" + ", ".join(parts) + ")"


def _weights_as_integers(weights: Sequence[Fraction]) -> tuple[list[int], int]:
    d = 1
    for w in weights:
        d = d * w.denominator // math.gcd(d, w.denominator)
    return [int(w * d) for w in weights], d


@dataclass
class Slices:
    """Exact gain array: ``num / den`` elementwise."""

    num: np.ndarray
    den: int

    def at(self, *index) -> Fraction:
        return Fraction(int(self.num[index]), self.den)

    def fractions(self) -> np.ndarray:
        out = np.empty(self.num.shape, dtype=object)
        for idx, v in np.ndenumerate(self.num):
            out[idx] = Fraction(int(v), self.den)
        return out


def payoff_slices(game: ExplicitGame, profile: MixedProfile, free: dict | None = None,
                  players: Sequence[int] | None = None) -> Slices:
    """Exact gains with the ``free`` players ranging over the given index
    lists and every other player contracted against its mixed strategy.

    The result has shape ``(len(players), *[len(free[k]) for k in sorted(free)])``.
    """
    free = free or {}
    players = list(range(game.player_count)) if players is None else list(players)
    if not profile.exact:
        raise ValidationError("exact payoff slices need a rational profile")
    lists, weights = [], []
    den = game.den
    for k in range(game.player_count):
        if k in free:
            lists.append(list(free[k]))
            weights.append(None)
        else:
            sup = profile.support(k)
            ints, d = _weights_as_integers([w for _, w in sup])
            lists.append([s for s, _ in sup])
            weights.append(ints)
            den *= d
    nums = game.numerators_on(lists)[players]
    bound = int(np.max(np.abs(nums))) if nums.size and nums.dtype != object else None
    for w in weights:
        if w is not None and bound is not None:
            bound *= sum(w)
    if bound is None or bound >= INT64_SAFE:
        nums = np.asarray(nums, dtype=object)
    # contract from the last axis so earlier axis numbers stay valid
    for k in range(game.player_count - 1, -1, -1):
        if weights[k] is None:
            continue
        w = np.asarray(weights[k], dtype=nums.dtype if nums.dtype != object else object)
        nums = np.tensordot(nums, w, axes=([k + 1], [0]))
    return Slices(np.asarray(nums), den)


def expected_gain(game: ExplicitGame, profile: MixedProfile, player: int):
    """Multilinear expectation of ``player``'s gain; exact for rational profiles."""
    profile.validate(game)
    game.check_player(player)
    if profile.exact:
        return payoff_slices(game, profile, players=[player]).at(0)
    return float(expected_gains_float(game, profile.as_float())[player])


def expected_gains(game: ExplicitGame, profile: MixedProfile) -> tuple:
    profile.validate(game)
    if profile.exact:
        sl = payoff_slices(game, profile)
        return tuple(sl.at(i) for i in range(game.player_count))
    return tuple(float(x) for x in expected_gains_float(game, profile.as_float()))


def expected_gains_float(game: ExplicitGame, vectors: Sequence[np.ndarray]) -> np.ndarray:
    lists, ws = [], []
    for v in vectors:
        idx = np.nonzero(np.asarray(v) > 0)[0]
        lists.append(idx)
        ws.append(np.asarray(v, dtype=float)[idx])
    t = game.numerators_on(lists).astype(float) / game.den
    for k in range(game.player_count - 1, -1, -1):
        t = np.tensordot(t, ws[k], axes=([k + 1], [0]))
    return t


# ---------------------------------------------------------------------------
# coalition structures


@dataclass(frozen=True)
class CoalitionStructure:
    """A partition of the players {0, ..., N-1} into blocks."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[:1]))
        object.__setattr__(self, "blocks", blocks)
        seen = set()
        for b in blocks:
            if not b:
                raise ValidationError("coalition structure has an empty block")
            for i in b:
                if i in seen:
                    raise ValidationError(f"player {i + 1} appears in two blocks")
                seen.add(i)
        if seen != set(range(len(seen))):
            raise ValidationError("blocks must cover players 1..N exactly")

    @property
    def player_count(self) -> int:
        return sum(len(b) for b in self.blocks)

    def block_of(self, player: int) -> int:
        for a, b in enumerate(self.blocks):
            if player in b:
                return a
        raise ValidationError(f"player {player + 1} is not in the structure")

    @property
    def is_grand(self) -> bool:
        return len(self.blocks) == 1

    @property
    def is_selfish(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    @classmethod
    def grand(cls, n: int) -> "CoalitionStructure":
        return cls((tuple(range(n)),))

    @classmethod
    def selfish(cls, n: int) -> "CoalitionStructure":
        return cls(tuple((i,) for i in range(n)))

    def label(self) -> str:
        return "|".join("{" + ",".join(str(i + 1) for i in b) + "}" for b in self.blocks)

    def to_json(self) -> list:
        return [[i + 1 for i in b] for b in self.blocks]

    def meet(self, other: "CoalitionStructure") -> "CoalitionStructure":
        """Coarsest common refinement."""
        parts = []
        for a in self.blocks:
            for b in other.blocks:
                common = tuple(sorted(set(a) & set(b)))
                if common:
                    parts.append(common)
        return CoalitionStructure(tuple(parts))

    def __str__(self):
        return self.label()


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _restricted_growth(n: int):
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(pos: int, top: int):
        if pos == n:
            yield tuple(a)
            return
        for v in range(top + 2):
            a[pos] = v
            yield from rec(pos + 1, max(top, v))

    a[0] = 0
    yield from rec(1, 0)


def enumerate_coalition_structures(n: int, cap: int = PARTITION_CAP) -> list[CoalitionStructure]:
    """All partitions of n players, ordered by block count then blocks."""
    if n < 1:
        raise ValidationError("need at least one player")
    if n > cap:
        raise CapacityError(
            f"{n} players give {bell_number(n)} coalition structures; "
            f"raise the partition cap (currently {cap}) to allow this")
    out = []
    for code in _restricted_growth(n):
        blocks: dict = {}
        for player, b in enumerate(code):
            blocks.setdefault(b, []).append(player)
        out.append(CoalitionStructure(tuple(tuple(v) for v in blocks.values())))
    out.sort(key=lambda p: (len(p.blocks), p.blocks))
    return out


class CoalitionGame:
    """Game in which every block acts as one player maximising the sum of
    its members' gains over the product of their strategy sets."""

    def __init__(self, base: ExplicitGame, structure: CoalitionStructure):
        if structure.player_count != base.player_count:
            raise ValidationError(
                f"structure covers {structure.player_count} players, "
                f"game has {base.player_count}")
        self.base = base
        self.structure = structure

    @property
    def block_count(self) -> int:
        return len(self.structure.blocks)

    def block_strategies(self, block: int) -> list[tuple]:
        members = self.structure.blocks[block]
        return list(itertools.product(*(range(self.base.sizes[i]) for i in members)))

    def block_labels(self, block: int) -> list[str]:
        members = self.structure.blocks[block]
        return [",".join(self.base.labels[i][s] for i, s in zip(members, joint))
                for joint in self.block_strategies(block)]

    def merged_numerators(self, numerators: np.ndarray) -> np.ndarray:
        """Sum member rows of a ``(N, ...)`` numerator array into blocks."""
        return np.stack([numerators[list(b)].sum(axis=0) for b in self.structure.blocks])

    def merged_table(self) -> np.ndarray:
        return self.merged_numerators(self.base.table())

    def block_gain(self, block: int, profile: Sequence[int]) -> Fraction:
        return sum((self.base.gain(i, profile) for i in self.structure.blocks[block]),
                   Fraction(0))

    def as_explicit(self) -> ExplicitGame:
        """The merged game as a k-player explicit game with joint labels."""
        merged = self.merged_table()
        order = [i for b in self.structure.blocks for i in b]
        moved = np.moveaxis(merged, [1 + i for i in order], list(range(1, 1 + len(order))))
        shape = (self.block_count,) + tuple(
            math.prod(self.base.sizes[i] for i in b) for b in self.structure.blocks)
        labels = [self.block_labels(a) for a in range(self.block_count)]
        return ExplicitGame(labels, numerators=moved.reshape(shape), den=self.base.den)


def coalition_game(game: ExplicitGame, structure: CoalitionStructure) -> CoalitionGame:
    return CoalitionGame(game, structure)


class BlockProfile:
    """Independent mixed strategies of blocks over joint member strategies.

    ``dists[a]`` maps a tuple of member strategies (in block order) to its
    probability. Members of one block may be correlated.
    """

    __slots__ = ("structure", "dists")

    def __init__(self, structure: CoalitionStructure, dists: Sequence[dict]):
        self.structure = structure
        self.dists = tuple(
            tuple(sorted((tuple(k), v) for k, v in d.items() if v > 0)) for d in dists)
        if len(self.dists) != len(structure.blocks):
            raise ValidationError("block profile needs one distribution per block")

    @classmethod
    def from_pure(cls, structure: CoalitionStructure, profile: Sequence[int]) -> "BlockProfile":
        return cls(structure, [{tuple(profile[i] for i in b): 1} for b in structure.blocks])

    def assemblies(self) -> Iterable[tuple[tuple, Fraction]]:
        """Pure profiles in the support with their probabilities."""
        n = self.structure.player_count
        for combo in itertools.product(*self.dists):
            prof = [0] * n
            weight = 1
            for b, (joint, w) in zip(self.structure.blocks, combo):
                for i, s in zip(b, joint):
                    prof[i] = s
                weight = weight * w
            yield tuple(prof), weight

    def gains(self, game: ExplicitGame) -> tuple:
        totals = [Fraction(0)] * game.player_count
        for prof, w in self.assemblies():
            g = game.gains_at(prof)
            for i in range(game.player_count):
                totals[i] += w * g[i]
        return tuple(totals)

    def marginal(self, player: int, size: int) -> tuple:
        a = self.structure.block_of(player)
        pos = self.structure.blocks[a].index(player)
        vec = [Fraction(0)] * size
        for joint, w in self.dists[a]:
            vec[joint[pos]] += w
        return tuple(vec)

    def is_product(self) -> bool:
        return all(len(b) == 1 or len(d) == 1 for b, d in zip(self.structure.blocks, self.dists))

    def to_mixed(self, sizes: Sequence[int]) -> MixedProfile:
        return MixedProfile([self.marginal(i, n) for i, n in enumerate(sizes)])

    def __eq__(self, other):
        return (isinstance(other, BlockProfile) and self.structure == other.structure
                and self.dists == other.dists)

    def __hash__(self):
        return hash((self.structure, self.dists))

    def __repr__(self):
        return f"BlockProfile({self.structure.label()}, {self.dists})"
