"""Coalition-structure values.

For a coalition structure the analysis assembles M(p), the profiles built
from each block's fair equilibria of maximal joint gain, and from it the
incentive and risk of every player to walk away, the prior deviation
probabilities, the worst-case gains under each set of deviators, and the
resulting value of the structure for each player.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cpt import CptParams, events_value
from .equilibrium import EquilibriumSet, acceptable_equilibria, nash_set
from .errors import CapacityError, ValidationError
from .game import (BlockProfile, CoalitionGame, CoalitionStructure, ExplicitGame,
                   MixedProfile, enumerate_coalition_structures, expected_gain,
                   format_number, payoff_slices)

MAX_JOINT_CAP = 5000
MAX_PURE_JOINT = 1_000_000
CHUNK_CELLS = 4_000_000


@dataclass
class MaxJointSet:
    structure: CoalitionStructure
    nash: EquilibriumSet
    acceptable: list          # per block: list of BlockProfile
    per_block: list           # per block: M-tilde, list of BlockProfile
    marginals: list           # per player: list of mixed-strategy tuples
    _profiles: list | None = None

    def __len__(self):
        return math.prod(len(m) for m in self.marginals)

    @property
    def pure_sets(self) -> list | None:
        """Per-player pure strategy indices when every marginal is pure."""
        out = []
        for vecs in self.marginals:
            idx = []
            for v in vecs:
                hot = [s for s, w in enumerate(v) if w]
                if len(hot) != 1:
                    return None
                idx.append(hot[0])
            out.append(idx)
        return out

    def pure_rows(self) -> np.ndarray:
        sets = self.pure_sets
        grids = np.meshgrid(*[np.asarray(x, dtype=np.int64) for x in sets], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def profile(self, idx: int) -> MixedProfile:
        pos = np.unravel_index(idx, [len(m) for m in self.marginals])
        return MixedProfile([m[int(p)] for m, p in zip(self.marginals, pos)])

    @property
    def profiles(self) -> list:
        if self._profiles is None:
            if len(self) > MAX_JOINT_CAP:
                raise CapacityError(f"M(p) for {self.structure.label()} has {len(self)} "
                                    f"mixed profiles, above the cap {MAX_JOINT_CAP}")
            self._profiles = [MixedProfile(list(c)) for c in itertools.product(*self.marginals)]
        return self._profiles


@dataclass
class Deviation:
    player: int
    incentive: Fraction
    risk: Fraction
    tau: Fraction
    incentive_witnesses: list = field(default_factory=list)   # (profile index, strategy)
    risk_witness: tuple | None = None                          # (profile index, pure profile)


@dataclass
class StructureReport:
    structure: CoalitionStructure
    max_joint: MaxJointSet
    deviations: list                 # per player Deviation
    events: list                     # per player: list of (J tuple, e, tau)
    values: list                     # per player Fraction

    def value(self, player: int) -> Fraction:
        return self.values[player]

    def value_cpt(self, player: int, params: CptParams, floor: float = 0.0) -> float:
        return events_value([(e, t) for _, e, t in self.events[player]], params, floor)

    def to_json(self, game: ExplicitGame, params: CptParams | None = None,
                floor: float = 0.0) -> list:
        rows = []
        for i in range(game.player_count):
            row = {
                "player": i + 1,
                "structure": self.structure.to_json(),
                "events": [{"J": [j + 1 for j in J], "e": format_number(e),
                            "tau": format_number(t)} for J, e, t in self.events[i]],
                "v_eut": format_number(self.values[i]),
            }
            if params is not None:
                row["v_cpt"] = self.value_cpt(i, params, floor)
            rows.append(row)
        return rows


# ---------------------------------------------------------------------------


def _mixed_key(vec: tuple):
    return tuple(-Fraction(w) for w in vec)


def max_joint_profiles(game: ExplicitGame, structure: CoalitionStructure,
                       nash: EquilibriumSet | None = None,
                       barycenter: bool = False) -> MaxJointSet:
    """Acceptable equilibria of maximal block gain and the assembled set M(p).

    M(p) is the product over players of the marginals their block's
    maximal acceptable equilibria assign to them.
    """
    cg = CoalitionGame(game, structure)
    nash = nash_set(cg) if nash is None else nash
    cache: dict = {}
    acceptable, per_block = [], []
    for a, members in enumerate(structure.blocks):
        acc = acceptable_equilibria(cg, a, nash, cache).profiles
        totals = [sum((cache.setdefault(bp, bp.gains(game))[i] for i in members), Fraction(0))
                  for bp in acc]
        top = max(totals)
        acceptable.append(acc)
        per_block.append([bp for bp, t in zip(acc, totals) if t == top])
    marginals: list = [None] * game.player_count
    for a, members in enumerate(structure.blocks):
        for i in members:
            vecs = [bp.marginal(i, game.sizes[i]) for bp in per_block[a]]
            if barycenter:
                count = len(vecs)
                vecs = [tuple(sum(col, Fraction(0)) / count for col in zip(*vecs))]
            marginals[i] = sorted(dict.fromkeys(vecs), key=_mixed_key)
    mj = MaxJointSet(structure, nash, acceptable, per_block, marginals)
    limit = MAX_PURE_JOINT if mj.pure_sets is not None else MAX_JOINT_CAP
    if len(mj) > limit:
        raise CapacityError(f"M(p) for {structure.label()} has {len(mj)} profiles, "
                            f"above the cap {limit}")
    return mj


def _dense_rows(game: ExplicitGame, mj: MaxJointSet):
    """Dense table and pure rows of M(p) when the vectorised route applies."""
    if mj.pure_sets is None:
        return None
    try:
        table = game.table()
    except CapacityError:
        return None
    return table, mj.pure_rows()


def _substituted(rows: np.ndarray, free: Sequence[int], sizes: Sequence[int]) -> tuple:
    """Index tuple over (row, *free strategies): players in ``free`` range
    over all strategies, the rest follow the row."""
    n = rows.shape[1]
    extra = len(free)
    idx = []
    for k in range(n):
        if k in free:
            shape = [1] * (1 + extra)
            shape[1 + free.index(k)] = sizes[k]
            idx.append(np.arange(sizes[k]).reshape(shape))
        else:
            idx.append(rows[:, k].reshape((-1,) + (1,) * extra))
    return tuple(idx)


def _incentive_dense(game, table, rows, j):
    vals = table[j][_substituted(rows, [j], game.sizes)]
    cur = table[j][tuple(rows.T)]
    diff = vals - cur[:, None]
    top = diff.max()
    wit = [(int(r), int(s)) for r, s in np.argwhere(diff == top)]
    return Fraction(int(top), game.den), wit


def _infimum_dense(game, table, rows, i, group):
    group = list(group)
    if not group:
        return Fraction(int(table[i][tuple(rows.T)].min()), game.den)
    width = math.prod(game.sizes[j] for j in group)
    step = max(1, CHUNK_CELLS // width)
    best = None
    for start in range(0, rows.shape[0], step):
        chunk = rows[start:start + step]
        vals = table[i][_substituted(chunk, group, game.sizes)]
        mask = np.zeros(vals.shape, dtype=bool)
        for pos, j in enumerate(group):
            own = table[j][_substituted(chunk, [j], game.sizes)]
            cur = table[j][tuple(chunk.T)]
            ok = own >= cur[:, None]
            shape = [ok.shape[0]] + [1] * len(group)
            shape[1 + pos] = game.sizes[j]
            mask |= ok.reshape(shape)
        if mask.any():
            low = vals[mask].min()
            best = low if best is None or low < best else best
    return Fraction(int(best), game.den)


def is_k_deviation(game: ExplicitGame, profile: MixedProfile, k: int, strategy) -> bool:
    """True when switching player k to ``strategy`` (pure index or mixed
    vector) does not lower k's gain."""
    if isinstance(strategy, (int, np.integer)):
        alt = profile.replace_pure(k, int(strategy))
    else:
        alt = profile.replace(k, strategy)
    return expected_gain(game, alt, k) >= expected_gain(game, profile, k)


def _own_gains(game: ExplicitGame, profile: MixedProfile, player: int):
    """Pure-deviation gains of ``player`` against ``profile`` and the current gain."""
    sl = payoff_slices(game, profile, free={player: range(game.sizes[player])},
                       players=[player])
    values = [Fraction(int(v), sl.den) for v in sl.num[0]]
    current = sum((w * values[s] for s, w in profile.support(player)), Fraction(0))
    return values, current


def _best_responses(game: ExplicitGame, profile: MixedProfile, player: int) -> list[int]:
    sl = payoff_slices(game, profile, free={player: range(game.sizes[player])},
                       players=[player])
    row = sl.num[0]
    best = row.max()
    return [int(s) for s in np.nonzero(row == best)[0]]


def incentive(game: ExplicitGame, mj: MaxJointSet, j: int,
              vectorized: bool = True) -> tuple[Fraction, list]:
    """Largest pure-deviation improvement of j against M(p), with witnesses."""
    dense = _dense_rows(game, mj) if vectorized else None
    if dense is not None:
        return _incentive_dense(game, dense[0], dense[1], j)
    best = None
    witnesses: list = []
    for idx, prof in enumerate(mj.profiles):
        values, current = _own_gains(game, prof, j)
        for s, v in enumerate(values):
            d = v - current
            if best is None or d > best:
                best, witnesses = d, [(idx, s)]
            elif d == best:
                witnesses.append((idx, s))
    return best, witnesses


def risk(game: ExplicitGame, mj: MaxJointSet, j: int,
         witnesses: Sequence[tuple]) -> tuple[Fraction, tuple | None]:
    """Largest loss j can suffer at a maximal deviation when some subset of
    the others answers with best responses to the profile before or after
    j's move."""
    worst = Fraction(0)
    where = None
    others = [k for k in range(game.player_count) if k != j]
    for idx, s_dev in witnesses:
        prof = mj.profile(idx)
        current = expected_gain(game, prof, j)
        moved = prof.replace_pure(j, s_dev)
        cands = {k: sorted(set(_best_responses(game, prof, k))
                           | set(_best_responses(game, moved, k))) for k in others}
        for r in range(1, len(others) + 1):
            for group in itertools.combinations(others, r):
                free = {k: cands[k] for k in group}
                sl = payoff_slices(game, moved, free=free, players=[j])
                low = sl.num[0].min()
                loss = current - Fraction(int(low), sl.den)
                if loss > worst:
                    pos = np.unravel_index(int(np.argmin(sl.num[0])), sl.num[0].shape)
                    chosen = {k: cands[k][p] for k, p in zip(group, pos)}
                    worst, where = loss, (idx, s_dev, chosen)
    return worst, where


def tau_from(incentive_value: Fraction, risk_value: Fraction) -> Fraction:
    if incentive_value == 0:
        return Fraction(0)
    return Fraction(incentive_value) / (incentive_value + risk_value)


def tau_subset(taus: Sequence[Fraction], i: int, group: Sequence[int]) -> Fraction:
    """Independence product: members of ``group`` deviate, the others do not."""
    out = Fraction(1)
    for j, t in enumerate(taus):
        if j == i:
            continue
        out *= t if j in group else 1 - t
    return out


def conditional_infimum(game: ExplicitGame, mj: MaxJointSet, i: int,
                        group: Sequence[int], vectorized: bool = True) -> Fraction:
    """Worst gain of i over M(p) when the players in ``group`` switch to pure
    strategies, at least one of them not losing by the switch."""
    group = sorted(group)
    if i in group:
        raise ValidationError(f"player {i + 1} cannot be among the deviators it faces")
    dense = _dense_rows(game, mj) if vectorized else None
    if dense is not None:
        return _infimum_dense(game, dense[0], dense[1], i, group)
    best = None
    for prof in mj.profiles:
        if not group:
            val = expected_gain(game, prof, i)
            best = val if best is None or val < best else best
            continue
        mask = None
        for pos, j in enumerate(group):
            values, current = _own_gains(game, prof, j)
            ok = np.array([v >= current for v in values])
            shape = [1] * len(group)
            shape[pos] = len(ok)
            ok = ok.reshape(shape)
            mask = ok if mask is None else (mask | ok)
        sl = payoff_slices(game, prof, free={j: range(game.sizes[j]) for j in group},
                           players=[i])
        arr = sl.num[0]
        mask = np.broadcast_to(mask, arr.shape)
        if not mask.any():
            continue
        low = Fraction(int(arr[mask].min()), sl.den)
        best = low if best is None or low < best else best
    return best


def analyze_structure(game: ExplicitGame, structure: CoalitionStructure,
                      barycenter: bool = False, nash: EquilibriumSet | None = None
                      ) -> StructureReport:
    mj = max_joint_profiles(game, structure, nash=nash, barycenter=barycenter)
    n = game.player_count
    deviations = []
    for j in range(n):
        d, wit = incentive(game, mj, j)
        if d > 0:
            r, where = risk(game, mj, j, wit)
        else:
            r, where = Fraction(0), None
        deviations.append(Deviation(j, d, r, tau_from(d, r), wit if d > 0 else [], where))
    taus = [dev.tau for dev in deviations]
    events, values = [], []
    for i in range(n):
        others = [k for k in range(n) if k != i]
        rows = []
        total = Fraction(0)
        for r in range(len(others) + 1):
            for group in itertools.combinations(others, r):
                t = tau_subset(taus, i, group)
                e = conditional_infimum(game, mj, i, group)
                rows.append((group, e, t))
                total += e * t
        events.append(rows)
        values.append(total)
    return StructureReport(structure, mj, deviations, events, values)


def analyze_all(game: ExplicitGame, barycenter: bool = False,
                structures: Sequence[CoalitionStructure] | None = None) -> list[StructureReport]:
    structures = enumerate_coalition_structures(game.player_count) if structures is None \
        else structures
    return [analyze_structure(game, p, barycenter=barycenter) for p in structures]


# thin per-quantity entry points


def coalition_value(game: ExplicitGame, structure: CoalitionStructure, i: int) -> Fraction:
    return analyze_structure(game, structure).values[i]


def coalition_value_cpt(game: ExplicitGame, structure: CoalitionStructure, i: int,
                        params: CptParams = CptParams(), floor: float = 0.0) -> float:
    return analyze_structure(game, structure).value_cpt(i, params, floor)


def tau_singleton(game: ExplicitGame, structure: CoalitionStructure, j: int) -> Fraction:
    return analyze_structure(game, structure).deviations[j].tau
