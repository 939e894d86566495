"""Cumulative prospect theory: value function, probability weighting,
rank-dependent decision weights and the two-stage mixed extension."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

MIN_GAMMA = 0.28
CUMULATIVE_SNAP = 1e-12


@dataclass(frozen=True)
class CptParams:
    alpha: float = 0.88
    beta: float = 0.88
    lam: float = 2.25
    gamma: float = 0.61

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValidationError(f"{name} must lie in (0, 1], got {value}")
        if self.lam < 1:
            raise ValidationError(f"lambda must be >= 1, got {self.lam}")
        if not MIN_GAMMA <= self.gamma <= 1:
            # below ~0.28 the weighting function stops being monotone
            raise ValidationError(f"gamma must lie in [{MIN_GAMMA}, 1], got {self.gamma}")

    @classmethod
    def identity(cls) -> "CptParams":
        return cls(1.0, 1.0, 1.0, 1.0)

    @property
    def is_identity(self) -> bool:
        return self.alpha == self.beta == self.lam == self.gamma == 1

    def linearized(self) -> "CptParams":
        """Same weighting, identity value function."""
        return CptParams(1.0, 1.0, 1.0, self.gamma)

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "lambda": self.lam, "gamma": self.gamma}

    @classmethod
    def from_json(cls, data: dict) -> "CptParams":
        defaults = cls()
        try:
            return cls(
                float(data.get("alpha", defaults.alpha)),
                float(data.get("beta", defaults.beta)),
                float(data.get("lambda", defaults.lam)),
                float(data.get("gamma", defaults.gamma)),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad CPT parameters: {exc}") from exc


DEFAULT_PARAMS = CptParams()


def value_fn(x, params: CptParams = DEFAULT_PARAMS) -> float:
    x = float(x)
    if x >= 0:
        return x ** params.alpha
    return -params.lam * (-x) ** params.beta


def weight_fn(p, params: CptParams = DEFAULT_PARAMS) -> float:
    p = float(p)
    if p < 0 or p > 1:
        raise ValidationError(f"probability outside [0, 1]: {p}")
    if p == 0 or p == 1:
        return p
    g = params.gamma
    return p**g / (p**g + (1 - p) ** g) ** (1 / g)


def _weight_array(p: np.ndarray, params: CptParams) -> np.ndarray:
    p = np.where(p > 1 - CUMULATIVE_SNAP, 1.0, np.clip(p, 0.0, 1.0))
    g = params.gamma
    if g == 1:
        return p
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p**g / (p**g + (1 - p) ** g) ** (1 / g)
    return np.where(p <= 0, 0.0, np.where(p >= 1, 1.0, out))


class Prospect:
    """Distinct outcomes in increasing order with their probabilities.

    Equal outcomes are merged and a zero outcome is added with probability
    zero when absent.
    """

    __slots__ = ("outcomes", "probs")

    def __init__(self, pairs: Iterable[tuple]):
        merged: dict = {}
        for x, p in pairs:
            if p < 0:
                raise ValidationError(f"negative probability {p}")
            merged[x] = merged.get(x, 0) + p
        if not merged:
            raise ValidationError("empty prospect")
        merged.setdefault(0, 0)
        total = sum(merged.values())
        if abs(float(total) - 1) > 1e-9:
            raise ValidationError(f"probabilities sum to {float(total)}, not 1")
        ordered = sorted(merged.items(), key=lambda kv: kv[0])
        self.outcomes = tuple(x for x, _ in ordered)
        self.probs = tuple(p for _, p in ordered)

    def __repr__(self):
        body = "; ".join(f"{x}, {p}" for x, p in zip(self.outcomes, self.probs))
        return f"Prospect({body})"


def _cumulative(p) -> float:
    # cumulative masses are summed in the input's own type (exact for
    # Fractions); float round-off next to 1 is snapped because w is steep there
    p = float(p)
    if p > 1 - CUMULATIVE_SNAP:
        return 1.0
    return max(p, 0.0)


def decision_weights(prospect: Prospect, params: CptParams = DEFAULT_PARAMS) -> list[float]:
    xs, ps = prospect.outcomes, prospect.probs
    n = len(xs)
    weights = [0.0] * n
    tail = 0
    for k in range(n - 1, -1, -1):
        if xs[k] <= 0:
            break
        upper = tail + ps[k]
        weights[k] = weight_fn(_cumulative(upper), params) - weight_fn(_cumulative(tail), params)
        tail = upper
    head = 0
    for k in range(n):
        if xs[k] >= 0:
            break
        upper = head + ps[k]
        weights[k] = weight_fn(_cumulative(upper), params) - weight_fn(_cumulative(head), params)
        head = upper
    return weights


def prospect_value(prospect: Prospect, params: CptParams = DEFAULT_PARAMS) -> float:
    weights = decision_weights(prospect, params)
    return sum(w * value_fn(x, params) for w, x in zip(weights, prospect.outcomes))


def prospect_value_batch(outcomes: np.ndarray, probs: np.ndarray,
                         params: CptParams = DEFAULT_PARAMS) -> np.ndarray:
    """Vectorised prospect_value over rows.

    Rows need not be sorted or merged: cumulative weights telescope over
    tied outcomes, so splitting a tie does not change the value.
    """
    outcomes = np.asarray(outcomes, dtype=float)
    probs = np.asarray(probs, dtype=float)
    order = np.argsort(outcomes, axis=1, kind="stable")
    xs = np.take_along_axis(outcomes, order, axis=1)
    ps = np.take_along_axis(probs, order, axis=1)

    gains = xs > 0
    gp = np.where(gains, ps, 0.0)
    # probability of this outcome or better, among gains
    up_incl = np.cumsum(gp[:, ::-1], axis=1)[:, ::-1]
    up_excl = up_incl - gp
    pi_gain = _weight_array(up_incl, params) - _weight_array(up_excl, params)

    losses = xs < 0
    lp = np.where(losses, ps, 0.0)
    down_incl = np.cumsum(lp, axis=1)
    down_excl = down_incl - lp
    pi_loss = _weight_array(down_incl, params) - _weight_array(down_excl, params)

    values = np.where(xs >= 0, np.abs(xs) ** params.alpha, -params.lam * np.abs(xs) ** params.beta)
    pi = np.where(gains, pi_gain, np.where(losses, pi_loss, 0.0))
    return np.sum(pi * values, axis=1)


def stage_one_prospect(game, profile, player: int, own: int) -> Prospect:
    """Prospect faced by `player` when playing pure `own` against the
    opponents' mixed strategies, grouping opponent profiles by equal gain."""
    n = game.player_count
    others = [k for k in range(n) if k != player]
    supports = [profile.support(k) for k in others]
    masses: dict = {}
    for combo in itertools.product(*supports):
        idx = [0] * n
        idx[player] = own
        weight = 1
        for k, (s, w) in zip(others, combo):
            idx[k] = s
            weight = weight * w
        g = game.gain(player, tuple(idx))
        masses[g] = masses.get(g, 0) + weight
    return Prospect(masses.items())


def cpt_mixed_extension(game, profile, player: int, params: CptParams = DEFAULT_PARAMS,
                        linear: bool = False) -> float:
    """Two-stage CPT value of a mixed profile for one player.

    Stage one evaluates, for each own pure strategy, the prospect over
    opponent outcomes. Stage two groups own strategies by equal stage-one
    value and evaluates the prospect weighted by the player's own mix.
    With ``linear`` the value function is replaced by the identity in both
    stages (weighting is kept).
    """
    if linear:
        params = params.linearized()
    profile.validate(game)
    stage_one: dict = {}
    for own, weight in profile.support(player):
        value = prospect_value(stage_one_prospect(game, profile, player, own), params)
        stage_one[value] = stage_one.get(value, 0) + weight
    return prospect_value(Prospect(stage_one.items()), params)


def events_value(events: Sequence[tuple], params: CptParams = DEFAULT_PARAMS,
                 floor: float = 0.0) -> float:
    """CPT value of a list of (outcome, probability) events.

    Equal outcomes are merged first. Probabilities strictly below ``floor``
    are dropped and the rest renormalised; if every probability would be
    dropped the full vector is kept.
    """
    merged: dict = {}
    for x, p in events:
        merged[x] = merged.get(x, 0) + p
    kept = {x: p for x, p in merged.items() if p > 0 and not float(p) < floor}
    if not kept:
        kept = {x: p for x, p in merged.items() if p > 0} or merged
    total = sum(kept.values())
    return prospect_value(Prospect((x, p / total) for x, p in kept.items()), params)


__all__ = [
    "CptParams",
    "DEFAULT_PARAMS",
    "Prospect",
    "value_fn",
    "weight_fn",
    "decision_weights",
    "prospect_value",
    "prospect_value_batch",
    "cpt_mixed_extension",
    "stage_one_prospect",
    "events_value",
    "Fraction",
]
