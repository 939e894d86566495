"""Command-line entry point: ``coopeq solve|value|reduce|gen|repro``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cpt import CptParams
from .deletion import iterate_deletion
from .errors import CoopEqError
from .game import enumerate_coalition_structures, format_number
from .gameio import dumps_game, load_game
from .generators import FAMILIES, make_standard_game
from .repro import run_repro_suite
from .solver import (cooperative_equilibrium_cpt, exact_cooperative_equilibrium,
                     quantal_coalition_distribution)
from .valuation import analyze_structure

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors share the validation exit code; 2 is reserved for repro mismatches
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _table(headers: list[str], rows: list[list]) -> str:
    cells = [[str(c) for c in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _emit(args, payload, table_text) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(table_text())


def _cpt_params(game) -> CptParams:
    fairness = game.fairness
    return fairness.params if getattr(fairness, "kind", None) == "cpt" else CptParams()


def _mix_text(mix: dict) -> str:
    return " + ".join(f"{w}*{label}" if w != 1 else label for label, w in mix.items())


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    game = load_game(args.game)
    if args.cpt:
        sol = cooperative_equilibrium_cpt(game, _cpt_params(game))
    else:
        sol = exact_cooperative_equilibrium(game)
    payload = sol.to_json()
    if args.quantal is not None:
        payload["quantal"] = quantal_coalition_distribution(sol.values, args.quantal)

    def text():
        out = [f"coalition structure: {sol.structure.label()}",
               "thresholds: " + ", ".join(str(t) for t in payload["thresholds"]),
               f"method: {sol.method}" + ("" if sol.exact else " (approximate)")]
        rows = [[label] + [str(v) for v in vals] for label, vals in payload["values"].items()]
        out.append(_table(["structure"] + [f"v_{i + 1}" for i in range(game.player_count)],
                          rows))
        for k, prof in enumerate(payload["equilibria"]):
            out.append(f"equilibrium {k + 1}: " + " | ".join(_mix_text(m) for m in prof))
        if "quantal" in payload:
            for i, dist in enumerate(payload["quantal"]):
                out.append(f"quantal player {i + 1}: "
                           + ", ".join(f"{k}={p:.6g}" for k, p in dist.items()))
        out += [f"note: {d}" for d in sol.diagnostics]
        return "\n".join(out)

    _emit(args, payload, text)
    return EXIT_OK


def cmd_value(args) -> int:
    game = load_game(args.game)
    structures = enumerate_coalition_structures(game.player_count)
    if args.structure is not None:
        if not 0 <= args.structure < len(structures):
            raise CoopEqError(f"--structure must lie in 0..{len(structures) - 1}")
        structures = [structures[args.structure]]
    params = _cpt_params(game) if args.cpt else None
    rows_json = []
    for p in structures:
        rows_json += analyze_structure(game, p).to_json(game, params, args.floor)

    def text():
        headers = ["structure", "player", "v_eut"] + (["v_cpt"] if params else [])
        rows = []
        for r in rows_json:
            label = "|".join("{" + ",".join(map(str, b)) + "}" for b in r["structure"])
            row = [label, r["player"], r["v_eut"]]
            if params:
                row.append(f"{r['v_cpt']:.9g}")
            rows.append(row)
        return _table(headers, rows)

    _emit(args, rows_json, text)
    return EXIT_OK


def cmd_reduce(args) -> int:
    game = load_game(args.game)
    trace = iterate_deletion(game)
    payload = trace.to_json()

    def text():
        rows = [[rnd["round"], r["player"], r["strategy"], r["type"]]
                for rnd in payload["rounds"] for r in rnd["removals"]]
        out = [_table(["round", "player", "strategy", "type"], rows) if rows
               else "no strategy is unplayable"]
        for i, keep in enumerate(payload["playable"]):
            out.append(f"player {i + 1} keeps: {', '.join(keep)}")
        return "\n".join(out)

    _emit(args, payload, text)
    return EXIT_OK


def cmd_gen(args) -> int:
    names = FAMILIES[args.family][1] if args.family in FAMILIES else {}
    params = {k: getattr(args, k) for k in _GEN_PARAMS if getattr(args, k) not in (None, False)}
    stray = [k for k in params if k not in names]
    if stray:
        raise CoopEqError(f"{args.family}: unknown parameter(s) {', '.join(sorted(stray))}")
    game = make_standard_game(args.family, **params)
    text = dumps_game(game)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return EXIT_OK


def cmd_repro(args) -> int:
    results = run_repro_suite(args.case)
    ok = all(r.ok for r in results)
    if args.json or args.format == "json":
        print(json.dumps([r.to_json() for r in results], indent=2))
    else:
        rows = []
        for r in results:
            j = r.to_json()
            rows.append(["PASS" if r.ok else "FAIL", r.case.id, r.case.description,
                         f"{r.seconds:.2f}s"])
        print(_table(["status", "case", "description", "time"], rows))
        for r in results:
            if not r.ok:
                j = r.to_json()
                detail = j["error"] or f"expected {j['expected']}, got {j['actual']}"
                print(f"{r.case.id}: {detail}")
    return EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# parser

_GEN_PARAMS = sorted({k for _, spec in FAMILIES.values() for k in spec})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="table")
    parser = _Parser(prog="coopeq", description="Cooperative equilibria of finite games.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="cooperative equilibrium of a game")
    p.add_argument("game", help="game JSON file, or - for stdin")
    p.add_argument("--cpt", action="store_true", help="use prospect-theory valuation")
    p.add_argument("--quantal", type=float, metavar="L",
                   help="also report a softmax over coalition structures with precision L")
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("value", parents=[common], help="coalition-structure values")
    p.add_argument("game")
    p.add_argument("--structure", type=int, metavar="INDEX",
                   help="only this structure (0 is the grand coalition)")
    p.add_argument("--cpt", action="store_true")
    p.add_argument("--floor", type=float, default=0.0, metavar="E",
                   help="drop CPT events with probability below E")
    p.set_defaults(run=cmd_value)

    p = sub.add_parser("reduce", parents=[common], help="iterated deletion trace")
    p.add_argument("game")
    p.set_defaults(run=cmd_reduce)

    p = sub.add_parser("gen", parents=[common], help="write a built-in game as JSON")
    p.add_argument("family", choices=sorted(FAMILIES))
    p.add_argument("-o", "--output", help="output file (default stdout)")
    for name in _GEN_PARAMS:
        if name == "punish":
            p.add_argument("--punish", action="store_true")
        else:
            p.add_argument(f"--{name}")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("repro", parents=[common], help="run the worked-example cases")
    p.add_argument("--case", metavar="ID")
    p.add_argument("--json", action="store_true", help="same as --format json")
    p.set_defaults(run=cmd_repro)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except CoopEqError as exc:
        print(f"coopeq: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
