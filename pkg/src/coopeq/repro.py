"""Reproduction harness: a fixed list of worked cases with expected outputs."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

from .cpt import CptParams
from .deletion import iterate_deletion
from .errors import ValidationError
from .game import CoalitionStructure, format_number
from .generators import make_standard_game
from .solver import equilibrium_in_beliefs, exact_cooperative_equilibrium
from .valuation import analyze_structure

GRAND = CoalitionStructure.grand(2)
SELFISH = CoalitionStructure.selfish(2)


@dataclass(frozen=True)
class ReproCase:
    id: str
    description: str
    family: str
    params: dict
    quantity: str
    expected: Any
    compute: Callable
    tolerance: float = 0.0        # 0 means exact; otherwise relative


@dataclass
class CaseResult:
    case: ReproCase
    actual: Any
    ok: bool
    seconds: float
    error: str | None = None

    def to_json(self) -> dict:
        return {"id": self.case.id, "description": self.case.description,
                "quantity": self.case.quantity, "expected": _show(self.case.expected),
                "actual": _show(self.actual), "ok": self.ok,
                "seconds": round(self.seconds, 3), "error": self.error}


def _show(x):
    if isinstance(x, Fraction):
        return format_number(x)
    if isinstance(x, (list, tuple)):
        return [_show(v) for v in x]
    if isinstance(x, dict):
        return {k: _show(v) for k, v in x.items()}
    return x


def _values(structure):
    def run(game):
        rep = analyze_structure(game, structure)
        return [rep.value(i) for i in range(game.player_count)]
    return run


def _equilibria(game):
    sol = exact_cooperative_equilibrium(game)
    return [[{k: Fraction(v) if isinstance(v, str) else v for k, v in d.items()}
             for d in prof] for prof in sol.to_json()["equilibria"]]


def _support(game):
    sol = exact_cooperative_equilibrium(game)
    return [sorted(d) for d in sol.labelled(sol.profile)]


def _tau(game):
    rep = analyze_structure(game, GRAND)
    return rep.deviations[0].tau


def _deletion(game):
    trace = iterate_deletion(game)
    return {"rounds": trace.round_count, "playable": trace.to_json()["playable"]}


def _same_as_plain(game):
    plain = make_standard_game("traveler", bonus=2, lo=2, hi=100)
    return _equilibria(game) == _equilibria(plain)


def _beliefs(game):
    found = equilibrium_in_beliefs(game, CptParams())
    return [float(found[0].vectors[0][0]), float(found[0].vectors[1][0])]


def _prisoner_case(mu: Fraction) -> ReproCase:
    if mu <= 1:
        mix = {"D": Fraction(1)}
    else:
        mix = {"C": (mu - 1) / mu, "D": 1 / mu}
    return ReproCase(f"prisoner-mu{format_number(mu)}-ce".replace("/", "_"),
                     f"prisoner's dilemma with cooperation reward {format_number(mu)}",
                     "prisoner", {"mu": mu}, "cooperative equilibrium", [[mix, mix]],
                     _equilibria)


CASES: list[ReproCase] = [
    ReproCase("traveler-b5-value", "traveler's dilemma, bonus 5, claims 180..300",
              "traveler", {"bonus": 5}, "v_i(grand)", [Fraction(3260, 11)] * 2,
              _values(GRAND)),
    ReproCase("traveler-b5-tau", "traveler's dilemma, bonus 5: leaving probability",
              "traveler", {"bonus": 5}, "tau_1(grand)", Fraction(4, 11), _tau),
    ReproCase("traveler-b5-support", "traveler's dilemma, bonus 5: equilibrium support",
              "traveler", {"bonus": 5}, "support", [["296", "297"], ["296", "297"]], _support),
    ReproCase("traveler-b2-value", "traveler's dilemma, bonus 2, claims 2..100",
              "traveler", {"bonus": 2, "lo": 2, "hi": 100}, "v_i(grand)",
              [Fraction(496, 5)] * 2, _values(GRAND)),
    ReproCase("traveler-b180-ce", "traveler's dilemma, bonus 180: selfish play",
              "traveler", {"bonus": 180}, "cooperative equilibrium",
              [[{"180": Fraction(1)}, {"180": Fraction(1)}]], _equilibria),
    *[_prisoner_case(Fraction(m)) for m in ("0", "1/2", "1", "2", "4", "10")],
    ReproCase("prisoner-mu3-value", "prisoner's dilemma, reward 3: grand coalition value",
              "prisoner", {"mu": 3}, "v_i(grand)", [Fraction(3)] * 2, _values(GRAND)),
    ReproCase("pd-cents-values", "prisoner's dilemma in cents (0.20/0.15/0.05/0)",
              "pd", {}, "v_1(grand), v_1(selfish)", [Fraction(1, 10), Fraction(1, 20)],
              lambda g: [_values(GRAND)(g)[0], _values(SELFISH)(g)[0]]),
    ReproCase("pd-cents-ce", "prisoner's dilemma in cents: equilibrium mix",
              "pd", {}, "cooperative equilibrium",
              [[{"C": Fraction(1, 2), "D": Fraction(1, 2)}] * 2], _equilibria),
    ReproCase("bertrand-n2-value", "Bertrand competition, 2 bidders on 2..100",
              "bertrand", {"n": 2}, "v_i(grand)", [Fraction(2500, 99)] * 2, _values(GRAND)),
    ReproCase("bertrand-n4-value", "Bertrand competition, 4 bidders on 2..100",
              "bertrand", {"n": 4}, "v_1(grand)", Fraction(390625, 970299),
              lambda g: analyze_structure(g, CoalitionStructure.grand(4)).value(0)),
    ReproCase("public-goods-a08-value", "public goods, 2 players, alpha 0.8",
              "public_goods", {"alpha": Fraction(4, 5)}, "v_i(grand)", [Fraction(7, 5)] * 2,
              _values(GRAND)),
    ReproCase("public-goods-crossover", "public goods, alpha 2/3: grand equals selfish",
              "public_goods", {"alpha": Fraction(2, 3)}, "v_1(grand), v_1(selfish)",
              [Fraction(1), Fraction(1)],
              lambda g: [_values(GRAND)(g)[0], _values(SELFISH)(g)[0]]),
    ReproCase("public-goods-a08-support", "public goods, alpha 0.8: equilibrium support",
              "public_goods", {"alpha": Fraction(4, 5)}, "support",
              [["33/50", "67/100"], ["33/50", "67/100"]], _support),
    ReproCase("bargaining-values", "bargaining over 100", "bargaining", {},
              "v_1(grand), v_1(selfish)", [Fraction(50), Fraction(0)],
              lambda g: [_values(GRAND)(g)[0], _values(SELFISH)(g)[0]]),
    ReproCase("bargaining-ce", "bargaining over 100: cooperative equilibrium", "bargaining", {},
              "cooperative equilibrium", [[{"50": Fraction(1)}, {"50": Fraction(1)}]],
              _equilibria),
    ReproCase("ultimatum-value", "ultimatum game, surplus 10", "ultimatum", {},
              "v_i(grand)", [Fraction(5), Fraction(5, 2)], _values(GRAND)),
    ReproCase("ultimatum-scale1-value", "ultimatum game, surplus 1", "ultimatum",
              {"scale": 1}, "v_i(grand)", [Fraction(1, 2), Fraction(1, 4)], _values(GRAND)),
    ReproCase("deletion-two-rounds", "zero-sum game needing two deletion rounds",
              "sure_gain", {}, "deletion outcome",
              {"rounds": 2, "playable": [["D"], ["L"]]}, _deletion),
    ReproCase("traveler-punish-ce", "traveler's dilemma with punishment vs plain, bonus 2",
              "traveler", {"bonus": 2, "lo": 2, "hi": 100, "punish": True},
              "same cooperative equilibria", True, _same_as_plain),
    ReproCase("asym-pennies-value", "asymmetric matching pennies", "asym_pennies", {},
              "v_i(grand)", [Fraction(40)] * 2, _values(GRAND)),
    ReproCase("pennies-cpt-beliefs", "matching pennies under CPT: equilibrium in beliefs",
              "matching_pennies", {}, "P(first strategy)", [0.5, 0.5], _beliefs,
              tolerance=1e-6),
]


def _matches(actual, expected, tol: float) -> bool:
    if isinstance(expected, dict) and isinstance(actual, dict):
        return expected.keys() == actual.keys() and all(
            _matches(actual[k], expected[k], tol) for k in expected)
    if isinstance(expected, (list, tuple)) and isinstance(actual, (list, tuple)):
        return len(actual) == len(expected) and all(
            _matches(a, e, tol) for a, e in zip(actual, expected))
    if isinstance(expected, float) or isinstance(actual, float):
        if tol == 0:
            return actual == expected
        return abs(float(actual) - float(expected)) <= tol * max(1.0, abs(float(expected)))
    return actual == expected


def run_case(case: ReproCase) -> CaseResult:
    start = time.perf_counter()
    try:
        game = make_standard_game(case.family, **case.params)
        actual = case.compute(game)
    except Exception as exc:  # a crashing case is reported, not raised
        return CaseResult(case, None, False, time.perf_counter() - start,
                          f"{type(exc).__name__}: {exc}")
    return CaseResult(case, actual, _matches(actual, case.expected, case.tolerance),
                      time.perf_counter() - start)


def thread_count() -> int:
    raw = os.environ.get("COOPEQ_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"COOPEQ_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError("COOPEQ_THREADS must be at least 1")
    return n


def select_cases(case_id: str | None = None) -> list[ReproCase]:
    if case_id is None:
        return list(CASES)
    chosen = [c for c in CASES if c.id == case_id or c.id.startswith(case_id + "-")
              or case_id.endswith("*") and c.id.startswith(case_id[:-1])]
    if not chosen:
        raise ValidationError(f"unknown repro case {case_id!r}; "
                              f"known: {', '.join(c.id for c in CASES)}")
    return chosen


def run_repro_suite(case_id: str | None = None, threads: int | None = None) -> list[CaseResult]:
    """Run the selected cases in parallel; results come back in list order."""
    cases = select_cases(case_id)
    threads = thread_count() if threads is None else threads
    if threads == 1:
        return [run_case(c) for c in cases]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_case, cases))
