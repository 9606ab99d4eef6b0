"""Command-line front end.

Exit codes: 0 positive answer, 1 negative answer, 2 bad input, 3 resource cap.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import fixtures
from .automata import (
    AutomatonError,
    WordError,
    accepts_finite,
    from_document,
    parse_time,
    parse_word,
    to_document,
)
from .constraints import ConstraintError
from .dot import document_dot
from .omega import DEFAULT_STATE_CAP, ResourceLimitError
from .separability import decide_k_separability, decide_km_separability
from .synthesis import controller_from_document, simulate_controller, solve_k, solve_km
from .transforms import game_from_document, game_to_document, GameSpec

OK, NO, BAD, CAP = 0, 1, 2, 3


class InputError(Exception):
    pass


def _load(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def cmd_member(args) -> int:
    aut = from_document(_load(args.automaton))
    try:
        word = parse_word(args.word)
    except WordError as exc:
        raise InputError(str(exc)) from None
    verdict = accepts_finite(aut, word)
    print("accept" if verdict else "reject")
    return OK if verdict else NO


def cmd_separate(args) -> int:
    a = from_document(_load(args.a))
    b = from_document(_load(args.b))
    if args.m is None:
        res = decide_k_separability(a, b, args.k, args.cap)
    else:
        res = decide_km_separability(a, b, args.k, args.m, args.cap)
    if not res.separable:
        print("not-separable")
        return NO
    doc = {"separator": to_document(res.separator), "m": res.m,
           "verification": res.report.to_document()}
    _emit(_dump(doc), args.o)
    if args.o:
        print(f"separable (m={res.m}); separator written to {args.o}")
    return OK


def cmd_synth(args) -> int:
    game = game_from_document(_load(args.game))
    if args.m is None:
        res = solve_k(game, args.k, args.cap)
    else:
        res = solve_km(game, args.k, args.m, args.cap)
    if res is None:
        print("no-controller")
        return NO
    doc = res.controller.to_document()
    _emit(_dump(doc), args.o)
    if args.o:
        print(f"controller (k={args.k}, m={res.m}) written to {args.o}")
    return OK


def _parse_moves(text: str) -> list:
    try:
        word = parse_word(text)
    except WordError as exc:
        raise InputError(str(exc)) from None
    return list(word)


def cmd_simulate(args) -> int:
    ctrl = controller_from_document(_load(args.controller))
    if args.moves is None:
        rng = random.Random(args.seed)
        t = 0
        moves = []
        for _ in range(args.length):
            t += parse_time(f"{rng.randint(0, 4 * (ctrl.m + 1))}/4")
            moves.append((rng.choice(ctrl.inputs), t))
    else:
        moves = _parse_moves(args.moves)
        unknown = [a for a, _ in moves if a not in ctrl.inputs]
        if unknown:
            raise InputError(f"unknown input symbol {unknown[0]!r}")
    run = simulate_controller(ctrl, moves)
    lines = [f"start memory={run.initial[0]} {_val(run.initial[1])}"]
    for a, b, t, mem, val in run.steps:
        lines.append(f"({a},{t}) -> {b} memory={mem} {_val(val)}")
    _emit("\n".join(lines) + "\n", args.o)
    return OK


def _val(val: dict) -> str:
    return "{" + ", ".join(f"{c}={v}" for c, v in sorted(val.items())) + "}"


FIXTURES = ("example-L", "example-L-complement", "example-Lk", "points", "deadline")


def cmd_fixtures(args) -> int:
    name = args.name
    if name == "example-L":
        doc = to_document(fixtures.example_L())
    elif name == "example-L-complement":
        doc = to_document(fixtures.example_L_complement())
    elif name == "example-Lk":
        if args.arg is None or not args.arg.isdigit() or int(args.arg) < 1:
            raise InputError("example-Lk needs a positive bit count")
        doc = to_document(fixtures.example_Lk(int(args.arg)))
    elif name == "points":
        a, b = fixtures.points()
        docs = {"A": to_document(a), "B": to_document(b)}
        if args.arg is None:
            doc = docs
        elif args.arg in docs:
            doc = docs[args.arg]
        else:
            raise InputError("points takes A or B")
    elif name == "deadline":
        doc = game_to_document(GameSpec(("a",), ("b_bad", "b_ok"), fixtures.deadline_condition()))
    else:
        raise InputError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    _emit(_dump(doc), args.o)
    return OK


def cmd_dot(args) -> int:
    try:
        text = document_dot(_load(args.document))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot render document: {exc}") from None
    _emit(text, args.o)
    return OK


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="timedsynth", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def budget(sp):
        sp.add_argument("-k", type=_nonneg, required=True, help="number of clocks")
        sp.add_argument("-m", type=_positive, help="maximal constant (omit for k-mode)")
        sp.add_argument("--cap", type=_positive, default=DEFAULT_STATE_CAP,
                        help="state cap for determinisation")
        sp.add_argument("-o", help="output path")

    sp = sub.add_parser("member", help="finite-word membership")
    sp.add_argument("automaton")
    sp.add_argument("word", help='timed word such as "(a,0)(a,2/5)"')
    sp.set_defaults(func=cmd_member)

    sp = sub.add_parser("separate", help="deterministic separability of two automata")
    sp.add_argument("a")
    sp.add_argument("b")
    budget(sp)
    sp.set_defaults(func=cmd_separate)

    sp = sub.add_parser("synth", help="timed controller synthesis")
    sp.add_argument("game")
    budget(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("simulate", help="conform run of a controller")
    sp.add_argument("controller")
    sp.add_argument("moves", nargs="?", help="Player I moves; random when omitted")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--length", type=_positive, default=8)
    sp.add_argument("-o", help="output path")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fixtures", help="emit a built-in example")
    sp.add_argument("name")
    sp.add_argument("arg", nargs="?")
    sp.add_argument("-o", help="output path")
    sp.set_defaults(func=cmd_fixtures)

    sp = sub.add_parser("dot", help="Graphviz rendering of a document")
    sp.add_argument("document")
    sp.add_argument("-o", help="output path")
    sp.set_defaults(func=cmd_dot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD if exc.code else OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD
    except (AutomatonError, ConstraintError, WordError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return CAP


if __name__ == "__main__":
    sys.exit(main())
