"""Independent brute-force references used to freeze expected values.

Pure Python over explicit payoff dictionaries; nothing here imports the
package's valuation code.
"""

from fractions import Fraction
from itertools import product


def bimatrix(game):
    """(g1, g2) as dicts keyed by (row, col) with Fraction values."""
    tab = game.table()
    m, n = game.sizes
    g1 = {(r, c): Fraction(int(tab[0, r, c]), game.den) for r in range(m) for c in range(n)}
    g2 = {(r, c): Fraction(int(tab[1, r, c]), game.den) for r in range(m) for c in range(n)}
    return g1, g2


def grand_value_pure(game):
    """Grand-coalition value of each player in a two-player game whose
    joint optimum is a unique pure profile.

    Returns dict with D, R, tau per player, e per player, v per player.
    """
    g1, g2 = bimatrix(game)
    g = (g1, g2)
    m, n = game.sizes
    cells = list(product(range(m), range(n)))
    top = max(g1[c] + g2[c] for c in cells)
    best = [c for c in cells if g1[c] + g2[c] == top]
    assert len(best) == 1, "oracle needs a unique joint optimum"
    star = best[0]

    def at(j, own, other):
        return (own, other) if j == 0 else (other, own)

    def best_replies(k, prof):
        own_idx = prof[k]
        other = prof[1 - k]
        size = game.sizes[k]
        vals = [g[k][at(k, s, other)] for s in range(size)]
        hi = max(vals)
        return [s for s in range(size) if vals[s] == hi]

    out = {"D": [], "R": [], "tau": [], "e_alone": [], "e_dev": [], "v": []}
    for j in (0, 1):
        k = 1 - j
        base = g[j][star]
        size = game.sizes[j]
        gains = [g[j][at(j, s, star[k])] for s in range(size)]
        D = max(gains) - base
        R = Fraction(0)
        if D > 0:
            for s in range(size):
                if gains[s] - base != D:
                    continue
                moved = list(star)
                moved[j] = s
                cands = set(best_replies(k, star)) | set(best_replies(k, tuple(moved)))
                for c in cands:
                    loss = base - g[j][at(j, s, c)]
                    R = max(R, loss)
        tau = Fraction(0) if D == 0 else D / (D + R)
        out["D"].append(D)
        out["R"].append(R)
        out["tau"].append(tau)
    for i in (0, 1):
        k = 1 - i
        alone = g[i][star]
        floor = None
        for s in range(game.sizes[k]):
            prof = at(k, s, star[i])
            if g[k][prof] >= g[k][star]:
                floor = g[i][prof] if floor is None else min(floor, g[i][prof])
        t = out["tau"][k]
        out["e_alone"].append(alone)
        out["e_dev"].append(floor)
        out["v"].append((1 - t) * alone + t * floor)
    return out


def traveler_gain(x, y, bonus):
    if x < y:
        return x + bonus
    if x == y:
        return x
    return y - bonus


def brute_pure_nash(game):
    """All pure Nash equilibria of a two-player game."""
    g1, g2 = bimatrix(game)
    m, n = game.sizes
    out = []
    for r, c in product(range(m), range(n)):
        if all(g1[(r, c)] >= g1[(s, c)] for s in range(m)) and \
                all(g2[(r, c)] >= g2[(r, t)] for t in range(n)):
            out.append((r, c))
    return out


def tk_weight(p, gamma):
    """Tversky-Kahneman weight, written out independently."""
    if p in (0, 1):
        return float(p)
    num = p ** gamma
    return num / (num + (1 - p) ** gamma) ** (1 / gamma)


def tk_value(x, alpha=0.88, beta=0.88, lam=2.25):
    return x ** alpha if x >= 0 else -lam * (-x) ** beta
