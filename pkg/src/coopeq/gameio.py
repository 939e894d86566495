"""Reading and writing games as JSON.

Gains are written as integers or "p/q" strings so that a file survives any
number of parse/serialize cycles unchanged.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cpt import CptParams
from .errors import ValidationError
from .game import (DEFAULT_ALTRUISM, DEFAULT_FAIRNESS, ExplicitGame, Fairness, TableAltruism,
                   ThetaAltruism, format_number, to_fraction)


def _altruism_from_json(data):
    if data is None:
        return DEFAULT_ALTRUISM
    if data == "table":
        return TableAltruism()
    if not isinstance(data, dict):
        raise ValidationError('altruism: expected {"theta": x} or "table"')
    theta = to_fraction(data.get("theta", Fraction(1, 5)))
    if not 0 <= theta <= 1:
        raise ValidationError(f"altruism.theta: must lie in [0, 1], got {format_number(theta)}")
    base = ThetaAltruism(theta)
    if "table" not in data:
        return base
    entries = []
    for n, row in enumerate(data["table"]):
        try:
            entries.append((to_fraction(row["k"]), to_fraction(row["y"]), to_fraction(row["z"]),
                            int(row["value"])))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"altruism.table[{n}]: needs k, y, z and value") from exc
    return TableAltruism(tuple(entries), base)


def _fairness_from_json(data):
    if data is None:
        return DEFAULT_FAIRNESS
    if not isinstance(data, dict):
        raise ValidationError("fairness: expected an object")
    kind = data.get("kind", "cpt")
    if kind == "linear":
        return Fairness("linear")
    if kind != "cpt":
        raise ValidationError(f"fairness.kind: unknown kind {kind!r}")
    return Fairness("cpt", CptParams.from_json(data))


def _gains_array(gains, sizes: tuple) -> np.ndarray:
    """Walk the nested list checking lengths, so errors name the bad index."""
    shape = (len(sizes),) + sizes

    def walk(node, depth, path):
        if depth == len(shape):
            if isinstance(node, list):
                raise ValidationError(f"gains{path}: expected a number, got a list")
            try:
                return to_fraction(node)
            except ValidationError as exc:
                raise ValidationError(f"gains{path}: {exc}") from None
        if not isinstance(node, list) or len(node) != shape[depth]:
            got = len(node) if isinstance(node, list) else type(node).__name__
            raise ValidationError(f"gains{path}: expected {shape[depth]} entries, got {got}")
        return [walk(child, depth + 1, f"{path}[{k}]") for k, child in enumerate(node)]

    out = np.empty(shape, dtype=object)
    out[...] = walk(gains, 0, "") if len(shape) > 1 else None
    return out


def game_from_json(data: dict) -> ExplicitGame:
    if not isinstance(data, dict):
        raise ValidationError("game: expected a JSON object")
    for key in ("players", "strategies", "gains"):
        if key not in data:
            raise ValidationError(f"game: missing field {key!r}")
    n = data["players"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError("players: expected a positive integer")
    strategies = data["strategies"]
    if not isinstance(strategies, list) or len(strategies) != n:
        raise ValidationError(f"strategies: expected {n} lists of labels")
    for i, row in enumerate(strategies):
        if not isinstance(row, list) or not row:
            raise ValidationError(f"strategies[{i}]: expected a nonempty list of labels")
    sizes = tuple(len(row) for row in strategies)
    gains = _gains_array(data["gains"], sizes)
    return ExplicitGame(strategies, gains,
                        altruism=_altruism_from_json(data.get("altruism")),
                        fairness=_fairness_from_json(data.get("fairness")),
                        name=data.get("name"))


def game_to_json(game: ExplicitGame) -> dict:
    tab = game.table()
    den = game.den
    flat = [format_number(Fraction(int(v), den)) for v in tab.ravel()]
    nested = np.array(flat, dtype=object).reshape(tab.shape).tolist()
    out = {}
    if game.name:
        out["name"] = game.name
    out["players"] = game.player_count
    out["strategies"] = [list(row) for row in game.labels]
    out["gains"] = nested
    out["altruism"] = game.altruism.to_json()
    out["fairness"] = game.fairness.to_json()
    return out


def dumps_game(game: ExplicitGame) -> str:
    return json.dumps(game_to_json(game), separators=(",", ":")) + "\n"


def loads_game(text: str, source: str = "<input>") -> ExplicitGame:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    try:
        return game_from_json(data)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def load_game(path: str) -> ExplicitGame:
    """Read a game from a file path, or from stdin when ``path`` is "-"."""
    if path == "-":
        return loads_game(sys.stdin.read(), "<stdin>")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None
    return loads_game(text, path)
