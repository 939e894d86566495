"""Iterated deletion of unplayable strategies.

A strategy is super-dominated when its best outcome is no better than the
worst outcome of another strategy of the same player. Deleting it can still
hurt other players, so each candidate deletion weighs the deleting player's
certain gain against the loss it causes to weaker players, measured through
the altruism function. The opponents' reaction to a fixed strategy is the
set of cooperative equilibria of the corresponding fiber game, computed
recursively.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConsistencyError
from .game import ExplicitGame, MixedProfile, expected_gain, fiber_game, format_number, restrict

_coop_memo: dict = {}
_memo_lock = threading.Lock()


def _gain_range(game: ExplicitGame, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-strategy min and max of player i's gain over all opponent assemblies."""
    if game.is_dense:
        tab = np.moveaxis(game.table()[i], i, 0).reshape(game.sizes[i], -1)
        return tab.min(axis=1), tab.max(axis=1)
    lo = np.empty(game.sizes[i], dtype=object)
    hi = np.empty(game.sizes[i], dtype=object)
    full = [range(n) for n in game.sizes]
    for s in range(game.sizes[i]):
        lists = list(full)
        lists[i] = [s]
        vals = game.numerators_on(lists)[i]
        lo[s], hi[s] = vals.min(), vals.max()
    return lo, hi


def dominance_pairs(game: ExplicitGame, i: int) -> list[tuple[int, int]]:
    """All (s, t) with s super-dominated by t, in index order."""
    lo, hi = _gain_range(game, i)
    n = game.sizes[i]
    return [(s, t) for s in range(n) for t in range(n)
            if s != t and hi[s] <= lo[t] and lo[s] < hi[t]]


def super_dominates(game: ExplicitGame, i: int, s, t) -> bool:
    """True when strategy ``s`` of player i is super-dominated by ``t``."""
    s, t = game.strategy_index(i, s), game.strategy_index(i, t)
    if s == t:
        return False
    lo, hi = _gain_range(game, i)
    return bool(hi[s] <= lo[t] and lo[s] < hi[t])


def coop_base(game: ExplicitGame, barycenter: bool = False) -> list[MixedProfile]:
    """Cooperative equilibria of a one-player game: its maximising strategies."""
    if game.player_count != 1:
        raise ValueError("coop_base needs a one-player game")
    row = game.table()[0]
    best = np.nonzero(row == row.max())[0]
    n = game.sizes[0]
    if barycenter:
        w = Fraction(1, len(best))
        return [MixedProfile([[w if s in best else 0 for s in range(n)]])]
    return [MixedProfile.pure((n,), (int(s),)) for s in best]


def _memo_key(game: ExplicitGame) -> tuple:
    return (game.fingerprint(), repr(game.altruism), repr(game.fairness))


def fiber_coop(game: ExplicitGame, i: int, s: int) -> list[MixedProfile]:
    """Cooperative equilibria of the game with player i frozen on ``s``
    (profiles over the remaining players)."""
    fiber = fiber_game(game, i, s)
    if fiber.player_count == 1:
        return coop_base(fiber)
    key = _memo_key(fiber)
    with _memo_lock:
        hit = _coop_memo.get(key)
    if hit is not None:
        return hit
    from .solver import exact_cooperative_equilibrium

    found = exact_cooperative_equilibrium(fiber).profiles
    with _memo_lock:
        _coop_memo.setdefault(key, found)
    return found


def _splice(profile: MixedProfile, i: int, s: int, size: int) -> MixedProfile:
    vecs = list(profile.vectors)
    vecs.insert(i, tuple(Fraction(int(k == s)) for k in range(size)))
    return MixedProfile(vecs)


def _fiber_reply(game: ExplicitGame, i: int, s: int):
    """Opponent replies to player i fixing ``s``: an int array of pure rows
    when every reply is pure, otherwise a list of mixed profiles."""
    fiber = fiber_game(game, i, s)
    if fiber.player_count == 1:
        row = fiber.table()[0]
        return np.nonzero(row == row.max())[0][:, None]
    found = fiber_coop(game, i, s)
    if all(p.is_pure for p in found):
        return np.array([p.pure_profile() for p in found], dtype=np.int64)
    return found


def _reply_gains(game: ExplicitGame, i: int, s: int, reply) -> list[list[Fraction]]:
    """gains[j][k]: player j's gain when i plays ``s`` against the k-th reply."""
    if isinstance(reply, np.ndarray):
        rows = np.insert(reply, i, s, axis=1)
        if game.is_dense:
            nums = game.table()[(slice(None),) + tuple(rows.T)]
        else:
            nums = np.stack([game.numerators_on([[v] for v in r]).reshape(-1) for r in rows],
                            axis=1)
        return [[Fraction(int(v), game.den) for v in row] for row in nums]
    full = [_splice(p, i, s, game.sizes[i]) for p in reply]
    return [[expected_gain(game, p, j) for p in full] for j in range(game.player_count)]


@dataclass
class PairQuantities:
    """Everything needed to decide between a worse strategy and a better one."""

    player: int
    worse: int
    better: int
    losers: list
    loss: Fraction               # P: what i gives up by playing the worse strategy
    certain_gain: Fraction       # P': i's certain gain under the better strategy
    help: dict                   # Q_j: best gain j receives from the switch
    status_worse: dict           # Q'_j(s): j's certain gain under the worse strategy
    status_better: dict          # j's certain gain under the better strategy
    altruism: dict               # A_ij, None when the switch is costless

    def to_json(self, game: ExplicitGame) -> dict:
        num = lambda d: {str(j + 1): format_number(v) for j, v in d.items()}
        return {
            "worse": game.labels[self.player][self.worse],
            "better": game.labels[self.player][self.better],
            "losers": [j + 1 for j in self.losers],
            "P": format_number(self.loss),
            "P_prime": format_number(self.certain_gain),
            "Q": num(self.help),
            "Q_prime": num(self.status_worse),
            "A": {str(j + 1): (None if v is None else format_number(v))
                  for j, v in self.altruism.items()},
        }


def losers_and_quantities(game: ExplicitGame, i: int, s, t,
                          coop_s: Sequence[MixedProfile] | None = None,
                          coop_t: Sequence[MixedProfile] | None = None) -> PairQuantities:
    s, t = game.strategy_index(i, s), game.strategy_index(i, t)
    n = game.player_count
    gs = _reply_gains(game, i, s, _fiber_reply(game, i, s) if coop_s is None else coop_s)
    gt = _reply_gains(game, i, t, _fiber_reply(game, i, t) if coop_t is None else coop_t)

    certain = min(gt[i])
    loss = certain - min(gs[i])
    if loss < 0:
        raise ConsistencyError(
            f"player {i + 1}: strategy {game.labels[i][t]} gives less than "
            f"{game.labels[i][s]} although it super-dominates it")
    losers = [j for j in range(n) if j != i
              and min(gs[j]) > max(gt[j])
              and all(a < b for a, b in zip(gt[j], gt[i]))]
    help_, status_s, status_t, alt = {}, {}, {}, {}
    for j in losers:
        help_[j] = max(gs[j]) - min(gt[j])
        status_s[j] = min(gs[j])
        status_t[j] = min(gt[j])
        alt[j] = None if loss == 0 else \
            Fraction(game.altruism(help_[j] / loss, certain, status_t[j]))
    return PairQuantities(i, s, t, losers, loss, certain, help_, status_s, status_t, alt)


def _first_type_holds(q: PairQuantities) -> bool:
    # costless switches never count as giving something up
    return all(q.altruism[j] is not None and q.loss > q.altruism[j] for j in q.losers)


def _second_type_holds(q: PairQuantities) -> bool:
    return any(q.altruism[j] is None or q.loss <= q.altruism[j] for j in q.losers)


def unplayable_first_type(game: ExplicitGame, i: int) -> dict[int, PairQuantities]:
    """Strategies of player i deletable by selfishness, each with its witness."""
    out: dict = {}
    for s, t in dominance_pairs(game, i):
        if s in out:
            continue
        q = losers_and_quantities(game, i, s, t)
        if _first_type_holds(q):
            out[s] = q
    return out


def unplayable_second_type(game: ExplicitGame, i: int,
                           playable: Sequence[int] | None = None) -> dict[int, PairQuantities]:
    """Better strategies of player i given up out of altruism, each with its witness.

    ``playable`` restricts both strategies of a pair (defaults to all)."""
    allowed = set(range(game.sizes[i]) if playable is None else playable)
    out: dict = {}
    for s, t in dominance_pairs(game, i):
        if t in out or s not in allowed or t not in allowed:
            continue
        q = losers_and_quantities(game, i, s, t)
        if _second_type_holds(q):
            out[t] = q
    return out


@dataclass
class Removal:
    round: int
    kind: str
    player: int
    strategy: str
    witness: PairQuantities
    witness_json: dict = field(default_factory=dict)


@dataclass
class DeletionTrace:
    original: ExplicitGame
    reduced: ExplicitGame
    playable: list                   # per player, indices into the original game
    removals: list = field(default_factory=list)

    @property
    def round_count(self) -> int:
        return max((r.round for r in self.removals), default=0)

    def rounds(self) -> list[list[Removal]]:
        return [[r for r in self.removals if r.round == k] for k in range(1, self.round_count + 1)]

    def to_json(self) -> dict:
        return {
            "rounds": [
                {"round": k + 1,
                 "removals": [{"player": r.player + 1, "strategy": r.strategy, "type": r.kind,
                               "witness": r.witness_json} for r in rnd]}
                for k, rnd in enumerate(self.rounds())
            ],
            "playable": [[self.original.labels[i][s] for s in keep]
                         for i, keep in enumerate(self.playable)],
        }


def _remove(game: ExplicitGame, keep: list, i: int, drop) -> tuple[ExplicitGame, list]:
    local = [k for k in range(game.sizes[i]) if k not in drop]
    keep = list(keep)
    keep[i] = [keep[i][k] for k in local]
    lists = [list(range(n)) for n in game.sizes]
    lists[i] = local
    return restrict(game, lists), keep


def iterate_deletion(game: ExplicitGame, max_rounds: int | None = None) -> DeletionTrace:
    """Alternate first-type and second-type removal until nothing changes."""
    current = game
    keep = [list(range(n)) for n in game.sizes]
    removals: list = []
    limit = sum(game.sizes) if max_rounds is None else max_rounds
    for rnd in range(1, limit + 1):
        changed = False
        for kind, finder in (("first", unplayable_first_type), ("second", unplayable_second_type)):
            for i in range(current.player_count):
                if current.sizes[i] == 1:
                    continue
                found = finder(current, i)
                if not found:
                    continue
                if len(found) == current.sizes[i]:
                    raise ConsistencyError(f"deletion would empty player {i + 1}'s strategy set")
                for k in sorted(found):
                    removals.append(Removal(rnd, kind, i, current.labels[i][k], found[k],
                                            found[k].to_json(current)))
                current, keep = _remove(current, keep, i, set(found))
                changed = True
        if not changed:
            break
    return DeletionTrace(game, current, keep, removals)
