"""Timed synthesis games and the zero-starting / strict-monotonicity transforms."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, replace
from typing import Sequence

from .automata import (
    EPS,
    AutomatonError,
    TimedAutomaton,
    Transition,
    _fresh,
    _sym_from_str,
    _sym_to_str,
    from_document,
    to_document,
)
from .constraints import FALSE, TRUE, And, Atom, Bool, Constraint, Not, Or, _compare, conj

START = "▷"


@dataclass(frozen=True)
class GameSpec:
    inputs: tuple
    outputs: tuple
    condition: TimedAutomaton
    zero_starting: bool = False
    strictly_monotonic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        pairs = {(a, b) for a in self.inputs for b in self.outputs}
        if set(self.condition.alphabet) != pairs:
            raise AutomatonError("winning condition must be over inputs x outputs")
        if self.condition.mode == "finite":
            raise AutomatonError("winning condition must be an omega-automaton")


def game_to_document(g: GameSpec) -> dict:
    return {
        "playerI": [_sym_to_str(a) for a in g.inputs],
        "playerII": [_sym_to_str(b) for b in g.outputs],
        "condition": to_document(g.condition),
    }


def game_from_document(doc: dict) -> GameSpec:
    try:
        inputs = tuple(_sym_from_str(a) for a in doc["playerI"])
        outputs = tuple(_sym_from_str(b) for b in doc["playerII"])
        cond = from_document(doc["condition"])
    except (KeyError, TypeError) as exc:
        raise AutomatonError(f"malformed game document: {exc}") from None
    return GameSpec(inputs, outputs, cond)


def dumps_game(g: GameSpec) -> str:
    return json.dumps(game_to_document(g), indent=2, ensure_ascii=False)


def loads_game(text: str) -> GameSpec:
    return game_from_document(json.loads(text))


# -- zero-starting ---------------------------------------------------------------


def start_symbol(inputs: Sequence) -> str:
    return _fresh(START, set(map(str, inputs)))


def zero_starting_transform(g: GameSpec) -> GameSpec:
    """Prefix every play with the start letter at time 0."""
    w = g.condition
    start = start_symbol(g.inputs)
    inputs = g.inputs + (start,)
    alphabet = tuple((a, b) for a in inputs for b in g.outputs)
    init = _fresh("init", w.locations)
    clocks = w.clocks or ("_z",)
    at_zero = conj(*(Atom(c, "=", 0) for c in clocks))
    trs = list(w.transitions)
    for b in g.outputs:
        for l in sorted(w.initial, key=repr):
            trs.append(Transition(init, (start, b), at_zero, frozenset(), l))
    cond = TimedAutomaton(alphabet, (init,) + w.locations, clocks, {init}, w.final, trs,
                          w.mode, w.final_sets)
    return GameSpec(inputs, g.outputs, cond, True, g.strictly_monotonic)


# -- strict monotonicity ---------------------------------------------------------


def flagged_inputs(inputs: Sequence) -> tuple:
    return tuple((a, f) for a in inputs for f in (0, 1))


def _substitute(c: Constraint, slot: dict, anchor: str | None) -> Constraint:
    """Evaluate logical clocks at the group start: x becomes slot(x) - anchor."""
    if isinstance(c, Bool):
        return c
    if isinstance(c, Not):
        inner = _substitute(c.arg, slot, anchor)
        return Bool(not inner.value) if isinstance(inner, Bool) else Not(inner)
    if isinstance(c, (And, Or)):
        parts = [_substitute(p, slot, anchor) for p in c.args]
        return conj(*parts) if isinstance(c, And) else _disj(parts)
    left = slot[c.left]
    right = slot[c.right] if c.right is not None else anchor
    if right is None:
        return Atom(left, c.op, c.const)
    if left == right:
        return TRUE if _compare(0, c.op, c.const) else FALSE
    return Atom(left, c.op, c.const, right)


def _disj(parts):
    from .constraints import disj

    return disj(*parts)


def _rename(c: Constraint, slot: dict) -> Constraint:
    return c.rename(slot)


def strict_monotonic_transform(g: GameSpec, strictness: bool = True) -> GameSpec:
    """Player I flags each letter; flag 0 letters happen at the previous time.

    The result reads letters ((a, flag), b) at strictly increasing times and
    accepts a play iff its flag-collapsed image is in W.  Each logical clock
    of W is stored in one of |X|+1 physical slots; a slot is reset when a group
    of letters starts, and letters inside a group read their logical values
    as differences to the group's anchor slot.

    With ``strictness`` the result also rejects non-strict plays (clock ``_s``).
    """
    w = g.condition
    logical = w.clocks
    n = len(logical)
    slots = tuple(f"_p{i}" for i in range(n + 1))
    inputs = flagged_inputs(g.inputs)
    alphabet = tuple((a, b) for a in inputs for b in g.outputs)

    def free_slot(mapping, resets, avoid=()):
        used = {mapping[i] for i, c in enumerate(logical) if c not in resets} | set(avoid)
        return next(i for i in range(n + 1) if i not in used)

    # location: (W location, slot index per logical clock, anchor slot or None, closed)
    start_map = (0,) * n
    init = [(l, start_map, None, False) for l in sorted(w.initial, key=repr)]
    seen = set(init)
    queue = deque(init)
    trs = []
    while queue:
        loc = queue.popleft()
        l, mapping, anchor, closed = loc
        phys = {c: slots[mapping[i]] for i, c in enumerate(logical)}
        for t in w.outgoing.get(l, ()):
            targets = []
            if t.is_eps:
                if anchor is not None and not closed:
                    guard = _substitute(t.guard, phys, slots[anchor])
                    new = tuple(anchor if c in t.resets else mapping[i] for i, c in enumerate(logical))
                    targets.append((EPS, guard, frozenset(), (t.target, new, anchor, False)))
                guard = t.guard.rename(phys)
                if t.resets:
                    s = free_slot(mapping, t.resets)
                    new = tuple(s if c in t.resets else mapping[i] for i, c in enumerate(logical))
                    resets = frozenset({slots[s]})
                else:
                    new, resets = mapping, frozenset()
                targets.append((EPS, guard, resets, (t.target, new, anchor, anchor is not None)))
            else:
                a, b = t.label
                # flag 1 (or the first letter): a new group starts now
                s = free_slot(mapping, t.resets)
                new = tuple(s if c in t.resets else mapping[i] for i, c in enumerate(logical))
                guard = t.guard.rename(phys)
                for flag in (0, 1):
                    if flag == 1 or anchor is None:
                        targets.append((((a, flag), b), guard, frozenset({slots[s]}),
                                        (t.target, new, s, False)))
                if anchor is not None and not closed:
                    guard0 = _substitute(t.guard, phys, slots[anchor])
                    new0 = tuple(anchor if c in t.resets else mapping[i] for i, c in enumerate(logical))
                    targets.append((((a, 0), b), guard0, frozenset(), (t.target, new0, anchor, False)))
            for label, guard, resets, target in targets:
                if guard == FALSE:
                    continue
                trs.append(Transition(loc, label, guard, resets, target))
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
    locs = sorted(seen, key=repr)
    final = {x for x in locs if x[0] in w.final}
    sets = tuple(frozenset(x for x in locs if x[0] in fs) for fs in w.final_sets)
    clocks = slots
    if strictness:
        clocks = slots + ("_s",)
        fixed = []
        for t in trs:
            if t.is_eps:
                fixed.append(t)
                continue
            first = t.source[2] is None
            guard = t.guard if first else conj(t.guard, Atom("_s", ">", 0))
            fixed.append(replace(t, guard=guard, resets=t.resets | {"_s"}))
        trs = fixed
    cond = TimedAutomaton(alphabet, tuple(locs), clocks, set(init), final, trs, w.mode, sets)
    return GameSpec(inputs, g.outputs, cond, g.zero_starting, True)


def collapse_flags(word) -> list:
    """Apply the flag collapse to [((a, flag), b, t)] giving [(a, b, t)]."""
    out = []
    current = None
    for i, ((a, flag), b, t) in enumerate(word):
        if i == 0 or flag == 1:
            current = t
        out.append((a, b, current))
    return out
