"""Enriched alphabets and the request/expiry protocol monitors.

A letter of the enriched game is ``((a, f), (b, Y))``: Player I plays a
symbol or ``TICK`` together with a fractional region ``f`` of the tracked
clocks, Player II answers a symbol or ``TICK`` together with the set ``Y`` of
requested clocks.  Every clock ``x`` has a monitor clock ``_h_x`` reset on each
x-request, so it holds the time elapsed since the latest request; ``_s`` is
reset on every letter.
"""
from __future__ import annotations

import itertools
from typing import Sequence

from .automata import BUCHI, EPS, AutomatonError, TimedAutomaton, Transition
from .constraints import FALSE, TRUE, Atom, Constraint, conj, disj
from .regions import (
    FractionalRegion,
    agrees,
    characteristic_constraint,
    default_clocks,
    enumerate_frac_regions,
    enumerate_regions,
)

TICK = "tick"
STEP_CLOCK = "_s"
VIOLATION = "viol"


def hat(x: str) -> str:
    return "_h_" + x


def clock_subsets(clocks: Sequence[str]) -> list[frozenset]:
    return [frozenset(c) for n in range(len(clocks) + 1) for c in itertools.combinations(clocks, n)]


def enriched_inputs(inputs: Sequence, clocks: Sequence[str]) -> tuple:
    fregs = enumerate_frac_regions(clocks)
    return tuple((a, f) for a in tuple(inputs) + (TICK,) for f in fregs)


def enriched_outputs(outputs: Sequence, clocks: Sequence[str]) -> tuple:
    return tuple((b, y) for b in tuple(outputs) + (TICK,) for y in clock_subsets(clocks))


def enriched_alphabet(inputs: Sequence, outputs: Sequence, clocks: Sequence[str]) -> tuple:
    return tuple(
        (a, b) for a in enriched_inputs(inputs, clocks) for b in enriched_outputs(outputs, clocks)
    )


def is_proper(letter) -> bool:
    (a, _), (b, _) = letter
    return a != TICK and b != TICK


def _check_symbols(inputs, outputs):
    if TICK in inputs or TICK in outputs:
        raise AutomatonError(f"symbol {TICK!r} is reserved")


# -- W^I: Player I's obligations ---------------------------------------------------

WI_CONDITIONS = ("start", "strict", "expiry", "tracked", "fregion")


def _fregion_guard(f: FractionalRegion) -> Constraint:
    """Monitor-clock regions (constant 1) over dom f that agree with f."""
    dom = sorted(f.dom)
    if not dom:
        return TRUE
    names = tuple(hat(x) for x in dom)
    parts = []
    for r in enumerate_regions(len(dom), 1, names):
        renamed = FractionalRegion(
            tuple(tuple(hat(x) for x in cls) for cls in f.classes), f.zero
        )
        if agrees(renamed, r):
            parts.append(characteristic_constraint(r))
    return disj(*parts) if parts else FALSE


def _wi_guard(f: FractionalRegion, started: bool, seen: frozenset,
              clocks: Sequence[str], conditions) -> Constraint | None:
    """Guard of a letter carrying ``f``; None when no valuation can satisfy it."""
    parts = []
    s = STEP_CLOCK
    if "start" in conditions and not started:
        parts.append(Atom(s, "=", 0))
    if "strict" in conditions and started:
        parts.append(Atom(s, ">", 0))
    tracked = f.dom
    one = f.one
    for x in clocks:
        h = hat(x)
        if "expiry" in conditions:
            if x in one:
                if x not in seen:
                    return None
                parts.append(Atom(h, "=", 1))
            elif x in seen:
                parts.append(disj(Atom(h, "<", 1), Atom(h, ">", 1)))
        if "tracked" in conditions:
            if x in tracked:
                if x not in seen:
                    return None
                parts.append(Atom(h, "<=", 1))
            elif x in seen:
                parts.append(Atom(h, ">", 1))
    if "fregion" in conditions:
        parts.append(_fregion_guard(f))
    return conj(*parts)


def _wi_automaton(alphabet, clocks, conditions, name_prefix="") -> TimedAutomaton:
    """Partial DTA over the enriched alphabet; missing moves are violations."""
    locs = [(started, frozenset(seen)) for started in (False, True)
            for n in range(len(clocks) + 1) for seen in itertools.combinations(clocks, n)]
    locs = [l for l in locs if l[0] or not l[1]]
    trs = []
    memo = {}
    for started, seen in locs:
        for letter in alphabet:
            (_, f), (_, ys) = letter
            key = (f, started, seen)
            if key not in memo:
                memo[key] = _wi_guard(f, started, seen, clocks, conditions)
            guard = memo[key]
            if guard is None or guard == FALSE:
                continue
            resets = frozenset(hat(y) for y in ys) | {STEP_CLOCK}
            trs.append(Transition((started, seen), letter, guard, resets, (True, seen | ys)))
    mon = tuple(hat(x) for x in clocks) + (STEP_CLOCK,)
    used = set()
    for t in trs:
        used |= t.guard.clocks() | t.resets
    return TimedAutomaton(alphabet, tuple(locs), tuple(c for c in mon if c in used or c == STEP_CLOCK),
                          {(False, frozenset())}, set(locs), trs, BUCHI)


def build_WI(inputs: Sequence, outputs: Sequence, clocks: Sequence[str]) -> TimedAutomaton:
    """All of Player I's obligations in one partial Buechi DTA (all locations final)."""
    _check_symbols(inputs, outputs)
    alphabet = enriched_alphabet(inputs, outputs, clocks)
    return _wi_automaton(alphabet, tuple(clocks), WI_CONDITIONS)


def _with_sink(aut: TimedAutomaton, accepting_sink: bool) -> TimedAutomaton:
    """Total version: uncovered moves go to a violation sink."""
    from .automata import complete_dta

    full = complete_dta(aut.replace(mode="finite"))
    sink = [l for l in full.locations if l not in set(aut.locations)]
    final = set(aut.locations) if not accepting_sink else set(sink)
    return full.replace(final=frozenset(final), mode=BUCHI)


def build_WI_monitors(k: int, inputs: Sequence = ("a",), outputs: Sequence = ("b",),
                      clocks: Sequence[str] | None = None) -> list[TimedAutomaton]:
    """One total DTA per obligation; the sink is the only non-final location."""
    clocks = default_clocks(k) if clocks is None else tuple(clocks)
    _check_symbols(inputs, outputs)
    alphabet = enriched_alphabet(inputs, outputs, clocks)
    groups = [("start",), ("strict",), ("expiry",), ("tracked",), ("fregion",)]
    return [_with_sink(_wi_automaton(alphabet, clocks, g), False) for g in groups]


# -- W^II: Player II's obligations -----------------------------------------------


def _letter_ok(letter) -> bool:
    """Conditions 4 and 5: proper iff proper, improper requests expire."""
    (a, f), (b, ys) = letter
    if (a == TICK) != (b == TICK):
        return False
    if b == TICK and not ys <= f.one:
        return False
    return True


def _chain_update(c: int, x: str, letter, m: int):
    """[(guard, new count)] for clock x's chain counter; count m is a violation."""
    (_, _), (b, ys) = letter
    if x not in ys:
        return [(TRUE, c)]
    if b != TICK:
        return [(TRUE, 0)]
    if c == 0:
        return [(TRUE, 1)]
    h = hat(x)
    return [(Atom(h, "=", 1), c + 1), (disj(Atom(h, "<", 1), Atom(h, ">", 1)), 1)]


def _wii_steps(counts: tuple, letter, clocks, m):
    """[(guard, counts')] where counts' is None for a violation."""
    if not _letter_ok(letter):
        return [(TRUE, None)]
    options = [(TRUE, ())]
    for x, c in zip(clocks, counts):
        nxt = []
        for g, cs in options:
            for g2, c2 in _chain_update(c, x, letter, m):
                nxt.append((conj(g, g2), cs + (c2,)))
        options = nxt
    out = []
    for g, cs in options:
        out.append((g, None if any(c >= m for c in cs) else cs))
    return out


def _wii_automaton(alphabet, clocks, m, accept_violation: bool) -> TimedAutomaton:
    locs = list(itertools.product(range(m), repeat=len(clocks)))
    trs = []
    for counts in locs:
        for letter in alphabet:
            _, (_, ys) = letter
            resets = frozenset(hat(y) for y in ys)
            for g, cs in _wii_steps(counts, letter, clocks, m):
                trs.append(Transition(counts, letter, g, resets,
                                      VIOLATION if cs is None else cs))
    trs += [Transition(VIOLATION, a, TRUE, _requests(a), VIOLATION) for a in alphabet]
    final = {VIOLATION} if accept_violation else set(locs)
    return TimedAutomaton(alphabet, tuple(locs) + (VIOLATION,), tuple(hat(x) for x in clocks),
                          {locs[0]}, final, trs, BUCHI)


def build_WII(inputs, outputs, clocks, m: int) -> TimedAutomaton:
    """Total DTA for conditions 4-6 (violation sink non-final)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    _check_symbols(inputs, outputs)
    alphabet = enriched_alphabet(inputs, outputs, clocks)
    return _wii_automaton(alphabet, tuple(clocks), m, False)


def build_not_WII(inputs, outputs, clocks, m: int) -> TimedAutomaton:
    """Verdict flip of :func:`build_WII`: accepts once Player II violates."""
    if m < 1:
        raise ValueError("m must be at least 1")
    _check_symbols(inputs, outputs)
    alphabet = enriched_alphabet(inputs, outputs, clocks)
    return _wii_automaton(alphabet, tuple(clocks), m, True)


def build_WII_monitors(k: int, m: int, inputs: Sequence = ("a",), outputs: Sequence = ("b",),
                       clocks: Sequence[str] | None = None) -> list[TimedAutomaton]:
    """Conditions 4/5 (letter-local) and one chain monitor per clock."""
    clocks = default_clocks(k) if clocks is None else tuple(clocks)
    if m < 1:
        raise ValueError("m must be at least 1")
    _check_symbols(inputs, outputs)
    alphabet = enriched_alphabet(inputs, outputs, clocks)
    local = [Transition("ok", a, TRUE, frozenset(), "ok" if _letter_ok(a) else VIOLATION)
             for a in alphabet]
    local += [Transition(VIOLATION, a, TRUE, frozenset(), VIOLATION) for a in alphabet]
    mons = [TimedAutomaton(alphabet, ("ok", VIOLATION), (), {"ok"}, {"ok"}, local, BUCHI)]
    for x in clocks:
        trs = []
        for c in range(m):
            for letter in alphabet:
                _, (_, ys) = letter
                for g, c2 in _chain_update(c, x, letter, m):
                    trs.append(Transition(c, letter, g, frozenset({hat(x)} & {hat(y) for y in ys}),
                                          VIOLATION if c2 >= m else c2))
        trs += [Transition(VIOLATION, a, TRUE, _requests(a) & {hat(x)}, VIOLATION)
                for a in alphabet]
        mons.append(TimedAutomaton(alphabet, tuple(range(m)) + (VIOLATION,), (hat(x),), {0},
                                   set(range(m)), trs, BUCHI))
    return mons


def build_not_WII_k(inputs, outputs, clocks) -> TimedAutomaton:
    """Player II violates condition 4/5, or some clock has an infinite
    improper request chain.

    Per clock the automaton guesses the first link, then demands an improper
    x-request exactly one time unit after each link; other letters must come
    before that instant.  Only link locations are final.
    """
    _check_symbols(inputs, outputs)
    clocks = tuple(clocks)
    alphabet = enriched_alphabet(inputs, outputs, clocks)
    wait = "wait"
    locs = [wait, VIOLATION]
    trs = []
    for letter in alphabet:
        _, (b, ys) = letter
        resets = frozenset(hat(y) for y in ys)
        if not _letter_ok(letter):
            trs.append(Transition(wait, letter, TRUE, resets, VIOLATION))
            continue
        trs.append(Transition(wait, letter, TRUE, resets, wait))
        for x in clocks:
            if b == TICK and x in ys:
                trs.append(Transition(wait, letter, TRUE, resets, ("link", x)))
    for x in clocks:
        h = hat(x)
        locs += [("chain", x), ("link", x)]
        for src in (("chain", x), ("link", x)):
            for letter in alphabet:
                _, (b, ys) = letter
                resets = frozenset(hat(y) for y in ys)
                if not _letter_ok(letter):
                    continue
                if x in ys:
                    if b == TICK:
                        trs.append(Transition(src, letter, Atom(h, "=", 1), resets, ("link", x)))
                else:
                    trs.append(Transition(src, letter, Atom(h, "<", 1), resets, ("chain", x)))
    trs += [Transition(VIOLATION, a, TRUE, _requests(a), VIOLATION) for a in alphabet]
    final = {VIOLATION} | {("link", x) for x in clocks}
    return TimedAutomaton(alphabet, tuple(locs), tuple(hat(x) for x in clocks), {wait}, final,
                          trs, BUCHI)


def enrich_condition(w: TimedAutomaton, inputs, outputs, clocks) -> TimedAutomaton:
    """phi^-1(W): proper letters follow W, tick-bearing letters only let time pass."""
    alphabet = enriched_alphabet(inputs, outputs, clocks)
    by_pair = {}
    ticks = []
    for letter in alphabet:
        (a, _), (b, _) = letter
        if a == TICK or b == TICK:
            ticks.append(letter)
        else:
            by_pair.setdefault((a, b), []).append(letter)
    trs = []
    for t in w.transitions:
        if t.label is EPS:
            trs.append(t)
            continue
        for letter in by_pair.get(t.label, ()):
            trs.append(Transition(t.source, letter, t.guard, t.resets | _requests(letter), t.target))
    for loc in w.locations:
        trs.extend(Transition(loc, letter, TRUE, _requests(letter), loc) for letter in ticks)
    clocks = tuple(w.clocks) + tuple(hat(x) for x in clocks)
    return w.replace(alphabet=alphabet, transitions=tuple(trs), clocks=clocks)


def _requests(letter) -> frozenset:
    # the request clocks are shared with the monitors, which reset them alike
    return frozenset(hat(y) for y in letter[1][1])
