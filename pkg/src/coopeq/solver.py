"""End-to-end cooperative equilibrium.

Pipeline: iterated deletion, coalition-structure values on the reduced game,
the structure each player prefers, the subgame of profiles that give every
player at least that value, and an equilibrium of that subgame.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .cpt import CptParams, _weight_array, prospect_value_batch, value_fn
from .deletion import DeletionTrace, iterate_deletion
from .equilibrium import _gain_scale, _interpolate, min_regret_profile, nash_equilibria
from .errors import CptUnavailableError, InfeasibleError, ValidationError
from .game import (CoalitionGame, CoalitionStructure, ExplicitGame, MixedProfile,
                   enumerate_coalition_structures, expected_gain, expected_gains, format_number, payoff_slices)
from .valuation import StructureReport, analyze_structure

PURE_SCAN_LIMIT = 2_000_000
LP_CANDIDATE_LIMIT = 400
GRID_PROFILE_LIMIT = 200_000
LP_TOL = 1e-7
CPT_TIE_TOL = 1e-9
CPT_MAX_PLAYERS = 3
CPT_MAX_STRATEGIES = 6
CPT_WORK_BUDGET = 20_000_000
BELIEF_EPS = 1e-3
REFINE_ROUNDS = 60
REFINE_STARTS = 5


def grid_step(strategies: int) -> int:
    """Default simplex grid denominator for a player with this many strategies."""
    if strategies <= 2:
        return 100
    if strategies == 3:
        return 40
    return 20


def simplex_grid(size: int, steps: int) -> np.ndarray:
    """All probability vectors over ``size`` strategies with entries k/steps."""
    if size == 1:
        return np.ones((1, 1))
    rows = [c for c in itertools.product(range(steps + 1), repeat=size - 1) if sum(c) <= steps]
    arr = np.array([list(c) + [steps - sum(c)] for c in rows], dtype=float)
    return arr / steps


# ---------------------------------------------------------------------------
# numeric helpers


def _deviation_matrix(game: ExplicitGame, profile: MixedProfile, i: int) -> np.ndarray:
    """Float matrix G[k, s] = g_k(s, sigma_{-i})."""
    if profile.exact:
        sl = payoff_slices(game, profile, free={i: range(game.sizes[i])})
        return sl.num.astype(float) / sl.den
    vecs = profile.as_float()
    lists = []
    for k in range(game.player_count):
        lists.append(range(game.sizes[k]) if k == i else
                     [s for s, w in enumerate(vecs[k]) if w > 0])
    arr = game.numerators_on(lists).astype(float) / game.den
    for k in reversed(range(game.player_count)):
        if k == i:
            continue
        w = np.array([vecs[k][s] for s in lists[k]], dtype=float)
        arr = np.tensordot(arr, w, axes=([k + 1], [0]))
    return arr


def _gains(game: ExplicitGame, profile: MixedProfile) -> list:
    return list(expected_gains(game, profile))


def _meets(values, thresholds, tol: float) -> bool:
    return all((v >= t) if isinstance(v, Fraction) else (v >= float(t) - tol)
               for v, t in zip(values, thresholds))


def constrained_best_response(game: ExplicitGame, profile: MixedProfile, i: int,
                              thresholds: Sequence[Fraction]) -> tuple[float, np.ndarray | None]:
    """Player i's best re-mix while every player keeps its threshold: the
    gain over the current mix and the maximising vector."""
    G = _deviation_matrix(game, profile, i)
    m = game.sizes[i]
    res = linprog(-G[i], A_ub=-G, b_ub=-np.array([float(t) for t in thresholds]),
                  A_eq=np.ones((1, m)), b_eq=[1.0], bounds=[(0, None)] * m, method="highs")
    current = float(np.dot(G[i], profile.as_float()[i]))
    if res.status != 0:
        # the current mix is feasible, so only numerical trouble lands here
        return 0.0, None
    return max(0.0, -res.fun - current), np.clip(res.x, 0.0, None)


def constrained_improvement(game: ExplicitGame, profile: MixedProfile, i: int,
                            thresholds: Sequence[Fraction]) -> float:
    """How much player i could gain by re-mixing while every player keeps
    its threshold (0 when already best)."""
    return constrained_best_response(game, profile, i, thresholds)[0]


def _rationalized(profile: MixedProfile) -> MixedProfile:
    vecs = []
    for v in profile.vectors:
        fr = [Fraction(float(w)).limit_denominator(10**6) for w in v]
        fr[-1] = 1 - sum(fr[:-1])
        if fr[-1] < 0:
            return profile
        vecs.append(fr)
    return MixedProfile(vecs)


def refine_induced(game: ExplicitGame, start: MixedProfile, thresholds: Sequence[Fraction],
                   tol: float, rounds: int = REFINE_ROUNDS) -> MixedProfile | None:
    """Round-robin constrained best responses from ``start``; returns a
    verified equilibrium (rational when possible) or None."""
    prof = start
    for _ in range(rounds):
        moved = False
        for i in range(game.player_count):
            gain, vec = constrained_best_response(game, prof, i, thresholds)
            if gain > tol and vec is not None:
                prof = prof.replace(i, [float(x) for x in vec / vec.sum()])
                moved = True
        if not moved:
            break
    for cand in (_rationalized(prof), prof):
        if is_induced_equilibrium(game, cand, thresholds, tol):
            return cand
    return None


def is_induced_equilibrium(game: ExplicitGame, profile: MixedProfile,
                           thresholds: Sequence[Fraction], tol: float | None = None) -> bool:
    tol = LP_TOL * _gain_scale(game) if tol is None else tol
    if not _meets(_gains(game, profile), thresholds, tol):
        return False
    return all(constrained_improvement(game, profile, i, thresholds) <= tol
               for i in range(game.player_count))


# ---------------------------------------------------------------------------
# induced game


@dataclass
class InducedGame:
    game: ExplicitGame
    thresholds: list
    pure: list = field(default_factory=list)          # pure feasible profiles (index tuples)
    boundary: list = field(default_factory=list)      # symmetric boundary profiles
    sampled: list = field(default_factory=list)       # grid-sampled feasible profiles
    extra: list = field(default_factory=list)         # caller-supplied feasible profiles

    def profiles(self) -> list[MixedProfile]:
        out = [MixedProfile.pure(self.game.sizes, p) for p in self.pure]
        seen: dict = {}
        for prof in out + self.boundary + self.sampled + self.extra:
            seen.setdefault(tuple(tuple(float(w) for w in v) for v in prof.vectors), prof)
        return list(seen.values())

    def generators(self) -> list[list[tuple]]:
        """Per player, the distinct mixed strategies appearing in feasible profiles."""
        gens: list = [dict() for _ in range(self.game.player_count)]
        for prof in self.profiles():
            for i, v in enumerate(prof.vectors):
                gens[i].setdefault(tuple(v), None)
        return [list(g) for g in gens]

    def is_feasible(self, profile: MixedProfile, tol: float | None = None) -> bool:
        tol = LP_TOL * _gain_scale(self.game) if tol is None else tol
        return _meets(_gains(self.game, profile), self.thresholds, tol)

    def __bool__(self):
        return bool(self.pure or self.boundary or self.sampled or self.extra)


def _pure_feasible(game: ExplicitGame, thresholds) -> tuple[list, Fraction | None]:
    """Pure profiles meeting every threshold, and the best joint slack."""
    if game.profile_count > PURE_SCAN_LIMIT:
        return [], None
    tab = game.table()
    scaled = [t * game.den for t in thresholds]
    ok = np.ones(game.sizes, dtype=bool)
    slack = None
    for k, t in enumerate(scaled):
        if t.denominator == 1:
            ok &= tab[k] >= int(t)
        else:
            ok &= tab[k] >= math.ceil(t)
    rows = [tuple(int(v) for v in r) for r in np.argwhere(ok)]
    if not rows:
        diffs = np.min(np.stack([tab[k].astype(float) - float(t) for k, t in enumerate(scaled)]),
                       axis=0)
        best = np.unravel_index(int(np.argmax(diffs)), diffs.shape)
        slack = min(Fraction(int(tab[(k,) + best]), 1) - t for k, t in enumerate(scaled)) / game.den
    return rows, slack


def _symmetric_boundary(game: ExplicitGame, thresholds) -> list[MixedProfile]:
    """Symmetric mixtures of two adjacent strategies whose common gain equals
    the (common) threshold."""
    n = game.player_count
    if len(set(thresholds)) != 1 or not game.is_symmetric():
        return []
    level = thresholds[0]
    size = game.sizes[0]
    out = []
    for s in range(size - 1):
        t = s + 1

        def gain(w):
            vec = [0] * size
            vec[s], vec[t] = w, 1 - w
            return expected_gain(game, MixedProfile([vec] * n), 0)

        xs = [Fraction(k, n) for k in range(n + 1)]
        ys = [gain(x) - level for x in xs]
        if all(y > 0 for y in ys) or all(y < 0 for y in ys):
            # a polynomial of degree n can still cross twice between nodes
            if n == 1:
                continue
        coeffs = _interpolate(xs, ys)
        if all(c == 0 for c in coeffs):
            continue
        roots = np.roots([float(c) for c in reversed(coeffs)]) if len(coeffs) > 1 else []
        for r in roots:
            if abs(r.imag) > 1e-12 or not -1e-12 <= r.real <= 1 + 1e-12:
                continue
            w = min(1.0, max(0.0, float(r.real)))
            exact = Fraction(w).limit_denominator(10**6)
            vec = [Fraction(0)] * size
            if gain(exact) == level:
                vec[s], vec[t] = exact, 1 - exact
                out.append(MixedProfile([vec] * n))
            else:
                fvec = [0.0] * size
                fvec[s], fvec[t] = w, 1.0 - w
                out.append(MixedProfile([fvec] * n))
    return out


def _grid_feasible(game: ExplicitGame, thresholds, steps: int | None) -> list[MixedProfile]:
    if game.player_count > 3:
        return []
    grids = [simplex_grid(n, steps or grid_step(n)) for n in game.sizes]
    count = math.prod(len(g) for g in grids)
    if count > GRID_PROFILE_LIMIT or game.profile_count > PURE_SCAN_LIMIT:
        return []
    tab = game.table().astype(float) / game.den
    vals = tab
    for k in reversed(range(game.player_count)):
        vals = np.tensordot(vals, grids[k], axes=([k + 1], [1]))
        vals = np.moveaxis(vals, -1, k + 1)
    ok = np.ones(vals.shape[1:], dtype=bool)
    for k, t in enumerate(thresholds):
        ok &= vals[k] >= float(t) - 1e-12
    out = []
    for idx in np.argwhere(ok):
        out.append(MixedProfile([[Fraction(round(x * (steps or grid_step(len(row)))),
                                           steps or grid_step(len(row))) for x in row]
                                 for row in (grids[k][j] for k, j in enumerate(idx))]))
    return out


def induced_game(game: ExplicitGame, thresholds: Sequence, resolution: int | None = None,
                 witnesses: Sequence[MixedProfile] = ()) -> InducedGame:
    """Feasible profiles of the subgame where everyone gets at least its threshold."""
    thresholds = [Fraction(t) for t in thresholds]
    if len(thresholds) != game.player_count:
        raise ValidationError("one threshold per player is required")
    pure, slack = _pure_feasible(game, thresholds)
    boundary = _symmetric_boundary(game, thresholds)
    sampled = [] if game.is_symmetric() else _grid_feasible(game, thresholds, resolution)
    ind = InducedGame(game, thresholds, pure, boundary, sampled)
    for w in witnesses:
        if ind.is_feasible(w):
            ind.extra.append(w)
    if not ind:
        raise InfeasibleError(
            "no profile reaches every threshold "
            f"({', '.join(str(format_number(t)) for t in thresholds)})", slack=slack)
    return ind


def _pure_blocked(game: ExplicitGame, rows: list, thresholds) -> list:
    """Pure feasible profiles where no feasible pure deviation helps the mover."""
    if not rows:
        return []
    tab = game.table()
    scaled = [t * game.den for t in thresholds]
    arr = np.array(rows, dtype=np.int64)
    keep = np.ones(len(rows), dtype=bool)
    for i in range(game.player_count):
        idx = [arr[:, k][:, None] if k != i else np.arange(game.sizes[i])[None, :]
               for k in range(game.player_count)]
        dev = tab[(slice(None),) + tuple(idx)]            # (N, rows, S_i)
        feas = np.ones(dev.shape[1:], dtype=bool)
        for k, t in enumerate(scaled):
            feas &= dev[k] >= t
        cur = tab[(i,) + tuple(arr.T)]
        better = feas & (dev[i] > cur[:, None])
        keep &= ~better.any(axis=1)
    return [r for r, k in zip(rows, keep) if k]


def induced_equilibria(ind: InducedGame) -> tuple[list[MixedProfile], bool]:
    """Verified equilibria of the induced game; the flag is False when only an
    approximate profile could be produced."""
    game = ind.game
    tol = LP_TOL * _gain_scale(game)
    candidates = list(ind.boundary)
    candidates += [MixedProfile.pure(game.sizes, p)
                   for p in _pure_blocked(game, ind.pure, ind.thresholds)]
    candidates += ind.extra + ind.sampled
    seen, found, scored = set(), [], []
    for prof in candidates[:LP_CANDIDATE_LIMIT]:
        key = tuple(tuple(float(x) for x in v) for v in prof.vectors)
        if key in seen:
            continue
        seen.add(key)
        if not ind.is_feasible(prof, tol):
            continue
        worst = max(constrained_improvement(game, prof, i, ind.thresholds)
                    for i in range(game.player_count))
        if worst <= tol:
            found.append(prof)
        else:
            scored.append((worst, len(scored), prof))
    if found:
        return found, True
    scored.sort(key=lambda x: x[:2])
    for _, _, prof in scored[:REFINE_STARTS]:
        hit = refine_induced(game, prof, ind.thresholds, tol)
        if hit is not None:
            return [hit], True
    if scored:
        return [scored[0][2]], False
    return [], False


# ---------------------------------------------------------------------------
# solutions


@dataclass
class CooperativeSolution:
    game: ExplicitGame
    mode: str
    structure: CoalitionStructure
    maximizers: list                  # per player: list of structures
    values: dict                      # structure label -> per-player values
    thresholds: list
    profiles: list                    # over the reduced game
    trace: DeletionTrace
    method: str
    exact: bool = True
    diagnostics: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def profile(self) -> MixedProfile | None:
        return self.profiles[0] if self.profiles else None

    def expanded(self, profile: MixedProfile) -> MixedProfile:
        """The profile written over the original (unreduced) strategy sets."""
        vecs = []
        for i, keep in enumerate(self.trace.playable):
            zero = Fraction(0) if profile.exact else 0.0
            vec = [zero] * self.game.sizes[i]
            for local, orig in enumerate(keep):
                vec[orig] = profile.vectors[i][local]
            vecs.append(vec)
        return MixedProfile(vecs)

    def labelled(self, profile: MixedProfile) -> list[dict]:
        full = self.expanded(profile)
        out = []
        for i, vec in enumerate(full.vectors):
            out.append({self.game.labels[i][s]: _num(w) for s, w in enumerate(vec) if w > 0})
        return out

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "structure": self.structure.to_json(),
            "maximizers": [[p.to_json() for p in ps] for ps in self.maximizers],
            "thresholds": [_num(t) for t in self.thresholds],
            "values": {label: [_num(v) for v in vals] for label, vals in self.values.items()},
            "equilibria": [self.labelled(p) for p in self.profiles],
            "method": self.method,
            "exact": self.exact,
            "diagnostics": list(self.diagnostics),
            "deletion": self.trace.to_json(),
        }


def _num(x):
    if isinstance(x, float):
        return x
    return format_number(Fraction(x))


def _choose_structure(structures, values, tie) -> tuple[CoalitionStructure, list, list]:
    """Common maximiser if one exists, else the meet of first maximisers."""
    n = len(values[0])
    maximizers = []
    for i in range(n):
        best = max(v[i] for v in values)
        maximizers.append([p for p, v in zip(structures, values) if v[i] >= best - tie(best)])
    diagnostics = []
    common = [p for p in structures if all(p in m for m in maximizers)]
    if common:
        # on a tie the selfish structure wins, so its Nash set is reported
        selfish = [p for p in common if p.is_selfish]
        chosen = (selfish or common)[0]
    else:
        chosen = maximizers[0][0]
        for m in maximizers[1:]:
            chosen = chosen.meet(m[0])
        diagnostics.append(
            "players prefer different coalition structures; using their meet "
            f"{chosen.label()}")
    return chosen, maximizers, diagnostics


def _nash_profiles(game: ExplicitGame) -> tuple[list[MixedProfile], bool]:
    eq = nash_equilibria(game)
    profs = [bp.to_mixed(game.sizes) for bp in eq.profiles]
    approximate = eq.method == "min-regret"
    return profs, not approximate


def _joint_slack(game: ExplicitGame, thresholds, pure_slack, witnesses) -> Fraction:
    """Largest s such that some candidate profile gives every k at least v_k + s."""
    best = pure_slack
    for w in witnesses:
        gains = expected_gains(game, w) if w.exact else None
        if gains is None:
            continue
        s = min(g - t for g, t in zip(gains, thresholds))
        best = s if best is None or s > best else best
    if best is None:
        raise InfeasibleError("no profile reaches every threshold")
    return best


def exact_cooperative_equilibrium(game: ExplicitGame, barycenter: bool = False,
                                  resolution: int | None = None,
                                  structures: Sequence[CoalitionStructure] | None = None
                                  ) -> CooperativeSolution:
    trace = iterate_deletion(game)
    reduced = trace.reduced
    structures = list(enumerate_coalition_structures(reduced.player_count)
                      if structures is None else structures)
    reports = [analyze_structure(reduced, p, barycenter=barycenter) for p in structures]
    values = [r.values for r in reports]
    chosen, maximizers, diagnostics = _choose_structure(structures, values, lambda b: 0)
    report = reports[structures.index(chosen)]
    thresholds = list(report.values)
    common = dict(game=game, mode="eut", structure=chosen, maximizers=maximizers,
                  values={p.label(): v for p, v in zip(structures, values)},
                  thresholds=thresholds, trace=trace, diagnostics=diagnostics, reports=reports)
    if chosen.is_selfish:
        profs, exact = _nash_profiles(reduced)
        return CooperativeSolution(profiles=profs, method="nash", exact=exact, **common)
    witnesses = report.max_joint.profiles if len(report.max_joint) <= 64 else []
    try:
        ind = induced_game(reduced, thresholds, resolution, witnesses=witnesses)
    except InfeasibleError as exc:
        slack = _joint_slack(reduced, thresholds, exc.slack, witnesses)
        diagnostics.append(
            "the thresholds are not jointly attainable; every threshold lowered by "
            f"{format_number(-slack)}")
        ind = induced_game(reduced, [t + slack for t in thresholds], resolution,
                           witnesses=witnesses)
    profs, verified = induced_equilibria(ind)
    if not profs:
        profs = [min_regret_profile(CoalitionGame(reduced, CoalitionStructure.selfish(
            reduced.player_count))).to_mixed(reduced.sizes)]
        verified = False
    if not verified:
        diagnostics.append("no verified equilibrium of the induced game; "
                           "reporting the least-improvable feasible profile")
    return CooperativeSolution(profiles=profs, method="induced", exact=verified, **common)


# ---------------------------------------------------------------------------
# CPT mode


def _check_cpt_caps(game: ExplicitGame, steps: int | None) -> list[np.ndarray]:
    if game.player_count > CPT_MAX_PLAYERS or max(game.sizes) > CPT_MAX_STRATEGIES:
        raise CptUnavailableError(
            f"CPT mode unavailable at this size: at most {CPT_MAX_PLAYERS} players and "
            f"{CPT_MAX_STRATEGIES} strategies each (got {game.player_count} players, "
            f"sizes {list(game.sizes)})")
    grids = [simplex_grid(n, steps or grid_step(n)) for n in game.sizes]
    work = math.prod(len(g) for g in grids) * game.player_count * max(game.sizes)
    if work > CPT_WORK_BUDGET:
        raise CptUnavailableError(
            f"CPT mode unavailable at this size: the belief grid needs about {work} "
            f"evaluations, above the budget {CPT_WORK_BUDGET}")
    return grids


def cpt_values_on_grid(game: ExplicitGame, grids: list[np.ndarray], params: CptParams,
                       linear: bool = False) -> np.ndarray:
    """Two-stage CPT values V[k, g_1, ..., g_N] on every grid profile."""
    if linear:
        params = params.linearized()
    n = game.player_count
    tab = game.table().astype(float) / game.den
    shape = tuple(len(g) for g in grids)
    out = np.empty((n,) + shape)
    for i in range(n):
        others = [k for k in range(n) if k != i]
        # opponent assemblies and their grid probabilities
        opp_idx = list(itertools.product(*(range(game.sizes[k]) for k in others)))
        opp_grid = list(itertools.product(*(range(len(grids[k])) for k in others)))
        probs = np.ones((len(opp_grid), len(opp_idx)))
        for col, assembly in enumerate(opp_idx):
            for row, gidx in enumerate(opp_grid):
                p = 1.0
                for k, s, gk in zip(others, assembly, gidx):
                    p *= grids[k][gk][s]
                probs[row, col] = p
        stage_one = np.empty((len(opp_grid), game.sizes[i]))
        for s in range(game.sizes[i]):
            outcomes = np.empty(len(opp_idx))
            for col, assembly in enumerate(opp_idx):
                full = list(assembly)
                full.insert(i, s)
                outcomes[col] = tab[(i,) + tuple(full)]
            stage_one[:, s] = prospect_value_batch(np.broadcast_to(outcomes, probs.shape),
                                                   probs, params)
        own = grids[i]
        rows_out = np.repeat(stage_one, len(own), axis=0)
        rows_p = np.tile(own, (len(opp_grid), 1))
        vals = prospect_value_batch(rows_out, rows_p, params).reshape(len(opp_grid), len(own))
        # vals[opp, own] -> out[i] with axes in player order
        arr = vals.reshape(tuple(len(grids[k]) for k in others) + (len(own),))
        arr = np.moveaxis(arr, -1, i)
        out[i] = arr
    return out


def _in_hull(point: np.ndarray, pts: np.ndarray) -> bool:
    if len(pts) == 0:
        return False
    if pts.shape[1] == 2:
        lo, hi = pts[:, 0].min(), pts[:, 0].max()
        return lo - 1e-12 <= point[0] <= hi + 1e-12
    m = len(pts)
    res = linprog(np.zeros(m), A_eq=np.vstack([pts.T, np.ones((1, m))]),
                  b_eq=np.append(point, 1.0), bounds=[(0, None)] * m, method="highs")
    return res.status == 0


def beliefs_equilibria_on_grid(values: np.ndarray, grids: list[np.ndarray],
                               feasible: np.ndarray | None = None,
                               eps: float = BELIEF_EPS) -> list[tuple]:
    """Grid profiles where each player's mix lies in the convex hull of its
    eps-best feasible replies (the convexified best-response test)."""
    n = values.shape[0]
    shape = values.shape[1:]
    feasible = np.ones(shape, dtype=bool) if feasible is None else feasible
    ok = feasible.copy()
    for i in range(n):
        v = np.where(feasible, values[i], -np.inf)
        best = v.max(axis=i, keepdims=True)
        near = feasible & (values[i] >= best - eps)
        # hull membership of the player's own grid point among its near-best points
        own = grids[i]
        moved = np.moveaxis(near, i, -1)
        flat = moved.reshape(-1, moved.shape[-1])
        member = np.zeros_like(flat)
        for r in range(flat.shape[0]):
            cols = np.nonzero(flat[r])[0]
            if len(cols) == 0:
                continue
            pts = own[cols]
            for c in range(flat.shape[1]):
                if flat[r, c]:
                    member[r, c] = True
                elif own.shape[1] == 2 or len(cols) > 1:
                    member[r, c] = _in_hull(own[c], pts)
        member = np.moveaxis(member.reshape(moved.shape), -1, i)
        ok &= member
    return [tuple(int(x) for x in idx) for idx in np.argwhere(ok)]


def equilibrium_in_beliefs(game: ExplicitGame, params: CptParams | None = None,
                           steps: int | None = None, eps: float = BELIEF_EPS,
                           linear: bool = False) -> list[MixedProfile]:
    """Equilibria in beliefs. Under expected utility these are the Nash
    equilibria; under CPT they are found on a simplex grid."""
    if params is None or params.is_identity:
        return _nash_profiles(game)[0]
    grids = _check_cpt_caps(game, steps)
    vals = cpt_values_on_grid(game, grids, params, linear)
    hits = beliefs_equilibria_on_grid(vals, grids, eps=eps)
    return [MixedProfile([list(grids[k][j]) for k, j in enumerate(idx)]) for idx in hits]


def cooperative_equilibrium_cpt(game: ExplicitGame, params: CptParams = CptParams(),
                                floor: float = 0.0, steps: int | None = None,
                                eps: float = BELIEF_EPS, linear: bool = False,
                                barycenter: bool = False) -> CooperativeSolution:
    if params.is_identity and floor == 0:
        sol = exact_cooperative_equilibrium(game, barycenter=barycenter)
        sol.mode = "cpt"
        sol.diagnostics.append("identity CPT parameters: expected-utility pipeline used")
        return sol
    trace = iterate_deletion(game)
    reduced = trace.reduced
    grids = _check_cpt_caps(reduced, steps)
    structures = enumerate_coalition_structures(reduced.player_count)
    reports = [analyze_structure(reduced, p, barycenter=barycenter) for p in structures]
    use = params.linearized() if linear else params
    values = [[r.value_cpt(i, use, floor) for i in range(reduced.player_count)] for r in reports]
    chosen, maximizers, diagnostics = _choose_structure(
        structures, values, lambda b: CPT_TIE_TOL * max(1.0, abs(b)))
    thresholds = values[structures.index(chosen)]
    vals = cpt_values_on_grid(reduced, grids, params, linear)
    if chosen.is_selfish:
        feasible = None
        method = "beliefs"
    else:
        # V applies the value function twice; thresholds once
        mapped = [value_fn(t, use) for t in thresholds]
        feasible = np.ones(vals.shape[1:], dtype=bool)
        for k, t in enumerate(mapped):
            feasible &= vals[k] >= t - CPT_TIE_TOL * max(1.0, abs(t))
        method = "induced-beliefs"
        if not feasible.any():
            diagnostics.append("no grid profile reaches the CPT thresholds; "
                               "dropping the thresholds")
            feasible = None
    hits = beliefs_equilibria_on_grid(vals, grids, feasible, eps)
    exact = True
    if not hits:
        exact = False
        diagnostics.append("no grid equilibrium in beliefs; reporting the best grid profile")
        regret = np.zeros(vals.shape[1:])
        for i in range(reduced.player_count):
            regret = np.maximum(regret, vals[i].max(axis=i, keepdims=True) - vals[i])
        hits = [tuple(int(x) for x in np.unravel_index(int(np.argmin(regret)), regret.shape))]
    profs = [MixedProfile([list(grids[k][j]) for k, j in enumerate(idx)]) for idx in hits]
    return CooperativeSolution(game=game, mode="cpt", structure=chosen, maximizers=maximizers,
                               values={p.label(): v for p, v in zip(structures, values)},
                               thresholds=thresholds, profiles=profs, trace=trace,
                               method=method, exact=exact, diagnostics=diagnostics,
                               reports=reports)


# ---------------------------------------------------------------------------
# quantal choice of structures


def quantal_coalition_distribution(values: dict | Sequence[StructureReport] | ExplicitGame,
                                   lambda_q: float) -> list[dict]:
    """Per player, softmax over coalition structures of lambda_q * value.

    ``values`` is a mapping from structure label to per-player values, a list
    of structure reports, or a game (values are then computed).
    """
    if lambda_q < 0:
        raise ValidationError("the quantal precision must be nonnegative")
    if isinstance(values, ExplicitGame):
        values = [analyze_structure(values, p)
                  for p in enumerate_coalition_structures(values.player_count)]
    if not isinstance(values, dict):
        values = {r.structure.label(): r.values for r in values}
    labels = list(values)
    table = np.array([[float(v) for v in values[k]] for k in labels])
    out = []
    for i in range(table.shape[1]):
        col = table[:, i]
        if math.isinf(lambda_q):
            top = col == col.max()
            probs = top / top.sum()
        else:
            z = lambda_q * (col - col.max())
            e = np.exp(z)
            probs = e / e.sum()
        out.append({k: float(p) for k, p in zip(labels, probs)})
    return out
