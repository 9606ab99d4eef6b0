"""Automata and games used as worked examples and test fixtures."""
from __future__ import annotations

from .automata import TimedAutomaton, Transition
from .constraints import TRUE, Atom, conj, parse_constraint


def _t(src, label, guard, resets, dst):
    g = guard if not isinstance(guard, str) else parse_constraint(guard)
    return Transition(src, label, g, frozenset(resets), dst)


def example_L() -> TimedAutomaton:
    """Unary words with t_n - t_i = 1 for some i < n (one clock, three locations)."""
    trs = [
        _t("p", "a", TRUE, (), "p"),
        _t("p", "a", TRUE, ("x",), "q"),
        _t("q", "a", "x < 1", (), "q"),
        _t("q", "a", "x = 1", (), "r"),
    ]
    return TimedAutomaton(("a",), ("p", "q", "r"), ("x",), {"p"}, {"r"}, trs)


def example_L_complement() -> TimedAutomaton:
    """Two-clock automaton for the words ``example_L`` rejects.

    Modes: length at most one; t_n - t_1 < 1; some i with t_n - t_i > 1 and
    t_n - t_{i+1} < 1; and the tie case t_{n-1} = t_n with t_n - t_i = 1 for
    some i < n - 1 (the three-location automaton cannot read a letter after
    its x = 1 step, so such words fall outside its language).
    """
    trs = [
        # length <= 1
        _t("s", "a", TRUE, (), "one"),
        # t_n - t_1 < 1
        _t("s", "a", TRUE, ("x",), "short"),
        _t("short", "a", TRUE, (), "short"),
        _t("short", "a", "x < 1", (), "acc"),
        # gap: y reset at i, x reset at i+1, last letter y > 1 && x < 1
        _t("s", "a", TRUE, ("y",), "gi"),
        _t("s", "a", TRUE, (), "wait"),
        _t("wait", "a", TRUE, (), "wait"),
        _t("wait", "a", TRUE, ("y",), "gi"),
        _t("gi", "a", "y > 1", (), "acc"),
        _t("gi", "a", TRUE, ("x",), "gj"),
        _t("gj", "a", TRUE, (), "gj"),
        _t("gj", "a", "y > 1 && x < 1", (), "acc"),
        # tie: y reset at i, x reset at n - 1 > i, last letter y = 1 && x = 0
        _t("gi", "a", TRUE, ("x",), "tj"),
        _t("gi", "a", TRUE, (), "ti"),
        _t("ti", "a", TRUE, (), "ti"),
        _t("ti", "a", TRUE, ("x",), "tj"),
        _t("tj", "a", "y = 1 && x = 0", (), "acc"),
    ]
    locs = ("s", "one", "short", "wait", "gi", "gj", "ti", "tj", "acc")
    return TimedAutomaton(("a",), locs, ("x", "y"), {"s"}, {"s", "one", "acc"}, trs)


def example_Lk(k: int) -> TimedAutomaton:
    """Strictly monotonic unary words with t_n - t_{n-2^k} = 1.

    Clock x0 enforces strict monotonicity, y0 is reset at the guessed position
    and a k-bit counter over x1..xk, y1..yk counts the remaining letters: bit j
    is one iff xj - yj < 0 (set by resetting xj alone), zero iff xj = yj.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    bits = list(range(1, k + 1))
    xs = {j: f"x{j}" for j in range(k + 1)}
    ys = {j: f"y{j}" for j in range(k + 1)}
    step = Atom("x0", ">", 0)
    one = {j: Atom(xs[j], "<", 0, ys[j]) for j in bits}
    zero = {j: Atom(xs[j], "=", 0, ys[j]) for j in bits}
    start = {"x0", "y0"} | {xs[j] for j in bits} | {ys[j] for j in bits}
    trs = [
        _t("s0", "a", TRUE, ("x0",), "p"),
        _t("s0", "a", TRUE, start, "q"),
        _t("p", "a", step, ("x0",), "p"),
        _t("p", "a", step, start, "q"),
    ]
    for j in bits:
        guard = conj(step, *(one[l] for l in bits if l < j), zero[j])
        resets = {"x0", xs[j]} | {xs[l] for l in bits if l < j} | {ys[l] for l in bits if l < j}
        trs.append(_t("q", "a", guard, resets, "q"))
    final_guard = conj(step, Atom("y0", "=", 1), *(one[j] for j in bits))
    trs.append(_t("q", "a", final_guard, ("x0",), "r"))
    clocks = tuple(xs.values()) + tuple(ys.values())
    return TimedAutomaton(("a",), ("s0", "p", "q", "r"), clocks, {"s0"}, {"r"}, trs)


def point(t: int, symbol: str = "a") -> TimedAutomaton:
    """The single-word language {(symbol, t)}."""
    trs = [_t("l0", symbol, Atom("x", "=", t), (), "l1")]
    return TimedAutomaton((symbol,), ("l0", "l1"), ("x",), {"l0"}, {"l1"}, trs)


def points() -> tuple[TimedAutomaton, TimedAutomaton]:
    return point(1), point(2)


def deadline_condition() -> TimedAutomaton:
    """Player I wins once Player II answers on the wrong side of global time 1.

    Before time 1 Player II must play b_bad, from time 1 on b_ok.
    """
    alphabet = (("a", "b_bad"), ("a", "b_ok"))
    trs = [
        _t("q0", ("a", "b_ok"), "g < 1", (), "q1"),
        _t("q0", ("a", "b_bad"), "g >= 1", (), "q1"),
        _t("q0", ("a", "b_bad"), "g < 1", (), "q0"),
        _t("q0", ("a", "b_ok"), "g >= 1", (), "q0"),
    ] + [_t("q1", ab, TRUE, (), "q1") for ab in alphabet]
    return TimedAutomaton(alphabet, ("q0", "q1"), ("g",), {"q0"}, {"q1"}, trs, "buchi")
