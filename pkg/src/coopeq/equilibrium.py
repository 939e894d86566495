"""Nash equilibria of coalition games and fair (acceptable) selection.

Blocks of a coalition structure act as single players over the product of
their members' strategies, so a block's mixed strategy is a distribution
over joint member strategies. Equilibria are returned as
:class:`~coopeq.game.BlockProfile` objects in canonical order.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .game import (INT64_SAFE, BlockProfile, CoalitionGame, CoalitionStructure,
                   ExplicitGame, Slices)

SUPPORT_CAP = 12
SUPPORT_PAIR_BUDGET = 20_000
NUMERIC_SUPPORT_BUDGET = 4_000
FLOAT_EPS = 1e-7
TIE_TOL = 1e-9


@dataclass
class EquilibriumSet:
    profiles: list
    complete: bool
    method: str = ""
    notes: list = field(default_factory=list)

    def __len__(self):
        return len(self.profiles)

    def __iter__(self):
        return iter(self.profiles)


# ---------------------------------------------------------------------------
# exact payoffs of block profiles


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def block_payoffs(cg: CoalitionGame, bp: BlockProfile, block: int,
                  players: Sequence[int] | None = None) -> Slices:
    """Exact summed gains of ``players`` (default: the block's members) while
    ``block`` ranges over all joint strategies and the other blocks follow
    ``bp``. Shape: one axis per member of ``block``."""
    base = cg.base
    blocks = cg.structure.blocks
    members = blocks[block]
    players = list(members) if players is None else list(players)
    others = [b for b in range(len(blocks)) if b != block]
    wden = 1
    for b in others:
        for _, w in bp.dists[b]:
            wden = _lcm(wden, Fraction(w).denominator)
    total = None
    for combo in itertools.product(*(bp.dists[b] for b in others)):
        lists: list = [None] * base.player_count
        weight = Fraction(1)
        for b, (joint, w) in zip(others, combo):
            for i, s in zip(blocks[b], joint):
                lists[i] = [s]
            weight *= w
        for i in members:
            lists[i] = range(base.sizes[i])
        nums = base.numerators_on(lists)[players].sum(axis=0)
        nums = nums.reshape([base.sizes[i] for i in members])
        scale = int(weight * wden ** len(others))
        if nums.dtype != object and int(np.max(np.abs(nums))) * abs(scale) >= INT64_SAFE // 4:
            nums = nums.astype(object)
        term = nums * scale
        if total is None:
            total = term
        else:
            if total.dtype != object and term.dtype == object:
                total = total.astype(object)
            total = total + term
    return Slices(total, base.den * wden ** len(others))


def profile_gains(game: ExplicitGame, bp: BlockProfile) -> tuple:
    return bp.gains(game)


def block_regret(cg: CoalitionGame, bp: BlockProfile, block: int) -> Fraction:
    sl = block_payoffs(cg, bp, block)
    best = Fraction(int(np.max(sl.num)), sl.den)
    current = sum((w * sl.at(*joint) for joint, w in bp.dists[block]), Fraction(0))
    return best - current


def max_regret(cg: CoalitionGame, bp: BlockProfile) -> Fraction:
    return max(block_regret(cg, bp, a) for a in range(cg.block_count))


def _gain_scale(game: ExplicitGame) -> float:
    try:
        t = game.table()
        return max(1.0, float(np.max(np.abs(t))) / game.den)
    except Exception:
        return 1.0


# ---------------------------------------------------------------------------
# pure and grand-coalition equilibria


def pure_nash(cg: CoalitionGame) -> EquilibriumSet:
    """All pure profiles where no block has a strictly improving joint deviation."""
    merged = cg.merged_table()
    ok = np.ones(merged.shape[1:], dtype=bool)
    for a, members in enumerate(cg.structure.blocks):
        best = merged[a].max(axis=tuple(members), keepdims=True)
        ok &= merged[a] == best
    profiles = [BlockProfile.from_pure(cg.structure, tuple(int(v) for v in idx))
                for idx in np.argwhere(ok)]
    return EquilibriumSet(profiles, complete=False, method="pure")


def grand_coalition_optima(cg: CoalitionGame) -> EquilibriumSet:
    """Pure profiles maximising the total gain (the vertices of the optimum set)."""
    if cg.block_count != 1:
        raise ValidationError("grand_coalition_optima needs a single-block structure")
    base = cg.base
    sizes = base.sizes
    if base.profile_count > 2_000_000 and base.player_count > 1 and base.is_symmetric():
        found = _symmetric_optima(base)
        profiles = [BlockProfile.from_pure(cg.structure, p) for p in found]
        return EquilibriumSet(profiles, complete=True, method="grand-coalition")
    best = None
    found: list = []
    step =max(1, 2_000_000 // max(1, math.prod(sizes[1:]) * base.player_count))
    for start in range(0, sizes[0], step):
        chunk = range(start, min(sizes[0], start + step))
        total = base.numerators_on([chunk] + [range(n) for n in sizes[1:]]).sum(axis=0)
        m = total.max()
        if best is None or m > best:
            best, found = m, []
        if m == best:
            for idx in np.argwhere(total == m):
                idx = tuple(int(v) for v in idx)
                found.append((idx[0] + start,) + idx[1:])
    profiles = [BlockProfile.from_pure(cg.structure, p) for p in found]
    return EquilibriumSet(profiles, complete=True, method="grand-coalition")


def sorted_profiles(k: int, n: int) -> np.ndarray:
    """All nondecreasing index tuples of length n over range(k), one per row."""
    arr = np.arange(k, dtype=np.int64)[:, None]
    for _ in range(n - 1):
        last = arr[:, -1]
        counts = k - last
        rep = np.repeat(arr, counts, axis=0)
        starts = np.cumsum(counts) - counts
        offset = np.arange(rep.shape[0]) - np.repeat(starts, counts)
        arr = np.column_stack([rep, np.repeat(last, counts) + offset])
    return arr


def _symmetric_optima(game: ExplicitGame) -> list[tuple]:
    # the total gain of a symmetric game is invariant under permuting players
    rows = sorted_profiles(game.sizes[0], game.player_count)
    best, hits = None, []
    for start in range(0, rows.shape[0], 1_000_000):
        chunk = rows[start:start + 1_000_000]
        nums = game._formula(tuple(chunk[:, p] for p in range(game.player_count))) \
            if not game.is_dense else game.table()[(slice(None),) + tuple(chunk.T)]
        total = np.asarray(nums).sum(axis=0)
        m = total.max()
        if best is None or m > best:
            best, hits = m, []
        if m == best:
            hits.extend(chunk[total == m].tolist())
    out = set()
    for h in hits:
        out.update(itertools.permutations(h))
    return sorted(out)


# ---------------------------------------------------------------------------
# exact linear algebra


def solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Unique solution of a (possibly overdetermined) rational system, or None."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if p is None:
            return None
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    return [aug[i][n] for i in range(n)]


def _indifference(payoff: np.ndarray, support_own: Sequence[int],
                  support_other: Sequence[int]) -> list | None:
    """Mix over ``support_other`` that equalises ``payoff[s, :]`` across
    ``support_own``. Returns [probabilities..., common value] or None."""
    k = len(support_other)
    rows, rhs = [], []
    for s in support_own:
        rows.append([payoff[s][t] for t in support_other] + [Fraction(-1)])
        rhs.append(Fraction(0))
    rows.append([Fraction(1)] * k + [Fraction(0)])
    rhs.append(Fraction(1))
    return solve_exact(rows, rhs)


def _float_indifference(payoff: np.ndarray, own, other):
    k = len(other)
    mat = np.zeros((len(own) + 1, k + 1))
    mat[:len(own), :k] = payoff[np.ix_(own, other)]
    mat[:len(own), k] = -1
    mat[len(own), :k] = 1
    rhs = np.zeros(len(own) + 1)
    rhs[-1] = 1
    if len(own) == k:
        try:
            return np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError:
            return None
    sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    if np.max(np.abs(mat @ sol - rhs)) > 1e-9:
        return None
    return sol


def _dominated_against(payoff: np.ndarray):
    """Memoised map from an opponent support to the own strategies that some
    other strategy strictly beats on every column of that support."""

    @functools.lru_cache(maxsize=None)
    def dominated(cols: tuple) -> frozenset:
        sub = payoff[:, list(cols)]
        return frozenset(s for s in range(sub.shape[0])
                         if np.any(np.all(sub > sub[s] + 1e-12, axis=1)))
    return dominated


def _supports(n: int, size: int):
    return itertools.combinations(range(n), size)


def support_enumeration_2p(cg: CoalitionGame, cap: int = SUPPORT_CAP,
                           budget: int = SUPPORT_PAIR_BUDGET) -> EquilibriumSet:
    """Equilibria of a two-block game from the indifference systems.

    Every support pair is screened in floating point and confirmed with
    exact rational arithmetic. Pure equilibria are always included.
    """
    if cg.block_count != 2:
        raise ValidationError("support enumeration needs exactly two blocks")
    view = cg.as_explicit()
    m, n = view.sizes
    if max(m, n) > cap:
        return _fallback_search(cg, note=f"block strategy count {max(m, n)} above cap {cap}")
    table = view.table()
    fa = table[0].astype(float) / view.den
    fb = table[1].astype(float) / view.den
    ea = view.gains_fraction()[0]
    eb_t = view.gains_fraction()[1].T
    tol = 1e-9 * max(1.0, float(np.max(np.abs(fa))), float(np.max(np.abs(fb))))
    dominated_rows = _dominated_against(fa)
    dominated_cols = _dominated_against(fb.T)
    found: list = []
    complete = True
    checked = 0
    sizes = sorted(((i, j) for i in range(1, m + 1) for j in range(1, n + 1)),
                   key=lambda ij: (ij[0] + ij[1], abs(ij[0] - ij[1]), ij))
    for size_i, size_j in sizes:
        if abs(size_i - size_j) > 1 and size_i > 1 and size_j > 1:
            continue
        for rows in _supports(m, size_i):
            for cols in _supports(n, size_j):
                checked += 1
                if checked > budget:
                    complete = False
                    break
                if dominated_rows(cols) & set(rows) or dominated_cols(rows) & set(cols):
                    continue
                y = _float_indifference(fa, rows, cols)
                if y is None:
                    continue
                x = _float_indifference(fb.T, cols, rows)
                if x is None:
                    continue
                if np.min(y[:-1]) <= 1e-12 or np.min(x[:-1]) <= 1e-12:
                    continue
                ymix = np.zeros(n)
                ymix[list(cols)] = y[:-1]
                xmix = np.zeros(m)
                xmix[list(rows)] = x[:-1]
                if np.max(fa @ ymix) > y[-1] + tol or np.max(xmix @ fb) > x[-1] + tol:
                    continue
                ye = _indifference(ea, rows, cols)
                xe = _indifference(eb_t, cols, rows)
                if ye is None or xe is None:
                    continue
                if min(ye[:-1]) <= 0 or min(xe[:-1]) <= 0:
                    continue
                yv = [Fraction(0)] * n
                for c, w in zip(cols, ye[:-1]):
                    yv[c] = w
                xv = [Fraction(0)] * m
                for r, w in zip(rows, xe[:-1]):
                    xv[r] = w
                if any(sum(ea[r][c] * yv[c] for c in cols) > ye[-1] for r in range(m)):
                    continue
                if any(sum(eb_t[c][r] * xv[r] for r in rows) > xe[-1] for c in range(n)):
                    continue
                found.append(_to_block_profile(cg, [xv, yv]))
            if checked > budget:
                break
        if checked > budget:
            break
    note = [] if complete else [f"support-pair budget {budget} exhausted"]
    if not found:
        # only degenerate supports were left out, so fall back to the slower searches
        return _fallback_search(cg, note="support enumeration found nothing (degenerate game)")
    return EquilibriumSet(_canonical(found), complete=complete, method="support", notes=note)


def _to_block_profile(cg: CoalitionGame, vectors) -> BlockProfile:
    dists = []
    for a in range(cg.block_count):
        joints = cg.block_strategies(a)
        dists.append({joints[s]: w for s, w in enumerate(vectors[a]) if w > 0})
    return BlockProfile(cg.structure, dists)


def _canonical(profiles: list) -> list:
    unique = list(dict.fromkeys(profiles))
    return sorted(unique, key=_profile_key)


def _profile_key(bp: BlockProfile):
    # pure profiles first, then by support and weights
    size = sum(len(d) for d in bp.dists)
    return (size, tuple(tuple((joint, -Fraction(w)) for joint, w in d) for d in bp.dists))


# ---------------------------------------------------------------------------
# fallbacks for large or many-block games


def symmetric_mixed(cg: CoalitionGame) -> list:
    """Symmetric equilibria mixing two adjacent-or-not strategies, found as
    rational roots of the indifference polynomial."""
    base = cg.base
    if not cg.structure.is_selfish or not base.is_symmetric():
        return []
    n = base.player_count
    k = base.sizes[0]
    if k > 40:
        return []
    out = []
    for s, t in itertools.combinations(range(k), 2):
        root_list = _indifference_roots(base, s, t)
        for w in root_list:
            vec = [Fraction(0)] * k
            vec[s], vec[t] = w, 1 - w
            bp = BlockProfile(cg.structure, [{(u,): p for u, p in enumerate(vec) if p > 0}] * n)
            if max_regret(cg, bp) <= 0:
                out.append(bp)
    return out


def _indifference_roots(game: ExplicitGame, s: int, t: int) -> list[Fraction]:
    """w in (0,1) where player 1 is indifferent between s and t when all
    others mix w on s and 1-w on t."""
    n = game.player_count
    degree = n - 1

    def h(w: Fraction) -> Fraction:
        vec = [Fraction(0)] * game.sizes[0]
        vec[s] += w
        vec[t] += 1 - w
        from .game import MixedProfile, payoff_slices
        prof = MixedProfile([vec] * n)
        sl = payoff_slices(game, prof, free={0: [s, t]}, players=[0])
        return sl.at(0, 0) - sl.at(0, 1)

    xs = [Fraction(i + 1, degree + 2) for i in range(degree + 1)]
    ys = [h(x) for x in xs]
    coeffs = _interpolate(xs, ys)
    if all(c == 0 for c in coeffs):
        return []
    roots = np.roots([float(c) for c in reversed(coeffs)]) if len(coeffs) > 1 else []
    out = []
    for r in roots:
        if abs(r.imag) > 1e-9 or not 0 < r.real < 1:
            continue
        cand = Fraction(r.real).limit_denominator(10**6)
        if 0 < cand < 1 and h(cand) == 0:
            out.append(cand)
    return sorted(set(out))


def _interpolate(xs: list[Fraction], ys: list[Fraction]) -> list[Fraction]:
    """Exact polynomial coefficients (lowest degree first) through the points."""
    n = len(xs)
    rows = [[x**p for p in range(n)] for x in xs]
    sol = solve_exact(rows, ys)
    return sol if sol is not None else [Fraction(0)] * n


def _numeric_support_search(cg: CoalitionGame, max_support: int = 3,
                            budget: int = NUMERIC_SUPPORT_BUDGET) -> BlockProfile | None:
    """First equilibrium found by solving the indifference equations of small
    supports numerically; rationalised and checked to FLOAT_EPS."""
    from scipy.optimize import least_squares

    view = cg.as_explicit()
    k = view.player_count
    sizes = view.sizes
    tens = view.table().astype(float) / view.den
    scale = max(1.0, float(np.max(np.abs(tens))))
    tens = tens / scale

    def payoff_vs(vecs, player):
        t = tens[player]
        for q in range(k - 1, -1, -1):
            if q != player:
                t = np.tensordot(t, vecs[q], axes=([q], [0]))
        return t

    size_profiles = sorted(itertools.product(*(range(1, min(max_support, n) + 1) for n in sizes)),
                           key=lambda z: (sum(z), z))
    tried = 0
    for sz in size_profiles:
        for supports in itertools.product(*(itertools.combinations(range(n), z)
                                            for n, z in zip(sizes, sz))):
            tried += 1
            if tried > budget:
                return None
            if _conditionally_dominated(tens, supports):
                continue
            free = [len(sp) - 1 for sp in supports]

            def unpack(theta):
                vecs, pos = [], 0
                for p, sp in enumerate(supports):
                    v = np.zeros(sizes[p])
                    raw = np.abs(theta[pos:pos + free[p]])
                    pos += free[p]
                    w = np.append(raw, max(0.0, 1 - raw.sum()))
                    v[list(sp)] = w
                    vecs.append(v)
                return vecs

            def resid(theta):
                vecs = unpack(theta)
                out = []
                for p, sp in enumerate(supports):
                    u = payoff_vs(vecs, p)
                    out.extend(u[list(sp[1:])] - u[sp[0]])
                    raw = np.abs(theta[sum(free[:p]):sum(free[:p]) + free[p]])
                    out.append(min(0.0, 1 - raw.sum()))
                return np.array(out) if out else np.zeros(1)

            dim = sum(free)
            starts = [np.concatenate([np.full(f, 1 / (f + 1)) for f in free])] if dim else [np.zeros(0)]
            if dim:
                rng = np.random.default_rng(tried)
                starts.append(np.concatenate([rng.dirichlet(np.ones(f + 1))[:-1] for f in free]))
            for start in starts:
                if dim:
                    sol = least_squares(resid, start, xtol=1e-14, ftol=1e-14, gtol=1e-14)
                    theta = sol.x
                else:
                    theta = start
                vecs = unpack(theta)
                if any(np.any(v < -1e-12) for v in vecs):
                    continue
                regret = 0.0
                for p in range(k):
                    u = payoff_vs(vecs, p)
                    regret = max(regret, float(np.max(u) - vecs[p] @ u))
                if regret > FLOAT_EPS:
                    continue
                exact = [_rationalize(v) for v in vecs]
                bp = _to_block_profile(cg, exact)
                if float(max_regret(cg, bp)) <= FLOAT_EPS * scale:
                    return bp
    return None


def _conditionally_dominated(tens: np.ndarray, supports) -> bool:
    """True when some supported strategy is strictly beaten by another
    strategy against every assembly of the opponents' supports."""
    for p, sp in enumerate(supports):
        idx = [list(q) if k != p else slice(None) for k, q in enumerate(supports)]
        block = np.moveaxis(tens[p][np.ix_(*[np.arange(tens.shape[k + 1]) if k == p else q
                                             for k, q in enumerate(idx)])], p, 0)
        block = block.reshape(block.shape[0], -1)
        for s in sp:
            if np.any(np.all(block > block[s] + 1e-12, axis=1)):
                return True
    return False


def _rationalize(vec: np.ndarray) -> list[Fraction]:
    fr = [Fraction(float(max(0.0, x))).limit_denominator(10**6) for x in vec]
    total = sum(fr)
    if total == 0:
        return fr
    fr = [x / total for x in fr]
    return fr


def min_regret_profile(cg: CoalitionGame, iterations: int = 2000) -> BlockProfile:
    """Fictitious-play average with the smallest regret seen; last resort."""
    view = cg.as_explicit()
    k = view.player_count
    tens = view.table().astype(float) / view.den
    counts = [np.zeros(n) for n in view.sizes]
    for c in counts:
        c[0] = 1
    best, best_vecs = math.inf, None
    for it in range(iterations):
        vecs = [c / c.sum() for c in counts]
        regret = 0.0
        for p in range(k):
            t = tens[p]
            for q in range(k - 1, -1, -1):
                if q != p:
                    t = np.tensordot(t, vecs[q], axes=([q], [0]))
            counts[p][int(np.argmax(t))] += 1
            regret = max(regret, float(np.max(t) - vecs[p] @ t))
        if regret < best:
            best, best_vecs = regret, vecs
    return _to_block_profile(cg, [_rationalize(v) for v in best_vecs])


def _fallback_search(cg: CoalitionGame, note: str) -> EquilibriumSet:
    notes = [note]
    eqs = pure_nash(cg)
    profiles = list(eqs.profiles)
    if not profiles:
        profiles = symmetric_mixed(cg)
        if profiles:
            notes.append("symmetric mixed equilibria")
    if not profiles:
        bp = _numeric_support_search(cg)
        if bp is not None:
            profiles = [bp]
            notes.append("numeric small-support equilibrium")
    if not profiles:
        profiles = [min_regret_profile(cg)]
        notes.append("approximate: minimum-regret profile")
    return EquilibriumSet(_canonical(profiles), complete=False, method="fallback", notes=notes)


def nash_set(cg: CoalitionGame, cap: int = SUPPORT_CAP) -> EquilibriumSet:
    """Finite set of (extreme) equilibria of the coalition game."""
    if cg.block_count == 1:
        return grand_coalition_optima(cg)
    if cg.block_count == 2:
        return support_enumeration_2p(cg, cap=cap)
    return _fallback_search(cg, note=f"{cg.block_count} blocks: pure and symmetric search")


def nash_equilibria(game: ExplicitGame) -> EquilibriumSet:
    return nash_set(CoalitionGame(game, CoalitionStructure.selfish(game.player_count)))


# ---------------------------------------------------------------------------
# fairness


def _nash_maxima(cg: CoalitionGame, block: int, nash: EquilibriumSet, gains: dict) -> dict:
    if not nash.profiles:
        raise ValidationError("disagreement needs a non-empty Nash set")
    for bp in nash.profiles:
        if bp not in gains:
            gains[bp] = bp.gains(cg.base)
    return {i: max(gains[bp][i] for bp in nash.profiles) for i in cg.structure.blocks[block]}


def _disagreement(cg: CoalitionGame, block: int, gains: tuple, best: dict) -> float:
    return sum(cg.base.fairness_for(i)(best[i], gains[i]) for i in cg.structure.blocks[block])


def disagreement(cg: CoalitionGame, block: int, profile: BlockProfile,
                 nash: EquilibriumSet, gains_cache: dict | None = None) -> float:
    """Sum over members of f_i(best gain over the Nash set, gain at profile)."""
    gains = gains_cache if gains_cache is not None else {}
    best = _nash_maxima(cg, block, nash, gains)
    if profile not in gains:
        gains[profile] = profile.gains(cg.base)
    return float(_disagreement(cg, block, gains[profile], best))


def acceptable_equilibria(cg: CoalitionGame, block: int, nash: EquilibriumSet | None = None,
                          gains_cache: dict | None = None) -> EquilibriumSet:
    """Nash profiles minimising the block's disagreement (all ties kept)."""
    nash = nash_set(cg) if nash is None else nash
    cache = gains_cache if gains_cache is not None else {}
    best = _nash_maxima(cg, block, nash, cache)
    scores = [float(_disagreement(cg, block, cache[bp], best)) for bp in nash.profiles]
    low = min(scores)
    tol = TIE_TOL * max(1.0, abs(low))
    chosen = [bp for bp, s in zip(nash.profiles, scores) if s <= low + tol]
    return EquilibriumSet(chosen, complete=nash.complete, method="acceptable")
