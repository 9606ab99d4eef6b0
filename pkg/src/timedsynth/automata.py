"""Timed automata with epsilon transitions, their untimed region automata,
closure constructions and exact (region based) membership and emptiness.
"""
from __future__ import annotations

import itertools
import json
import math
import re
from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import networkx as nx

from .constraints import (
    TRUE,
    Atom,
    Constraint,
    ConstraintError,
    conj,
    disj,
    parse_constraint,
)
from .regions import (
    Region,
    _successor_values,
    characteristic_constraint,
    enumerate_regions,
    region_reset,
    successor_chain,
    zero_region,
)

EPS = None
FINITE, BUCHI, GBUCHI = "finite", "buchi", "gbuchi"


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    source: Hashable
    label: Hashable  # EPS for epsilon
    guard: Constraint
    resets: frozenset
    target: Hashable

    @property
    def is_eps(self) -> bool:
        return self.label is EPS


@dataclass(frozen=True)
class TimedAutomaton:
    alphabet: tuple
    locations: tuple
    clocks: tuple
    initial: frozenset
    final: frozenset
    transitions: tuple
    mode: str = FINITE
    # generalised Buechi acceptance (mode GBUCHI); ``final`` is then unused
    final_sets: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "clocks", tuple(sorted(set(self.clocks))))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "final", frozenset(self.final))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "final_sets", tuple(frozenset(s) for s in self.final_sets))
        locs = set(self.locations)
        if len(locs) != len(self.locations):
            raise AutomatonError("duplicate locations")
        if not self.initial <= locs or not self.final <= locs:
            raise AutomatonError("initial/final locations must be locations")
        if self.mode not in (FINITE, BUCHI, GBUCHI):
            raise AutomatonError(f"unknown mode {self.mode!r}")
        if self.mode == GBUCHI and not self.final_sets:
            raise AutomatonError("generalised Buechi mode needs final sets")
        symbols = set(self.alphabet)
        clocks = set(self.clocks)
        for tr in self.transitions:
            if tr.source not in locs or tr.target not in locs:
                raise AutomatonError(f"transition endpoint outside locations: {tr}")
            if not tr.is_eps and tr.label not in symbols:
                raise AutomatonError(f"label {tr.label!r} outside the alphabet")
            if not tr.guard.clocks() <= clocks or not tr.resets <= clocks:
                raise AutomatonError(f"transition uses unknown clocks: {tr}")

    @cached_property
    def max_constant(self) -> int:
        return max((tr.guard.max_constant() for tr in self.transitions), default=0)

    @cached_property
    def outgoing(self) -> dict:
        out = defaultdict(list)
        for tr in self.transitions:
            out[tr.source].append(tr)
        return dict(out)

    @property
    def has_eps(self) -> bool:
        return any(tr.is_eps for tr in self.transitions)

    @property
    def acceptance_sets(self) -> tuple:
        return self.final_sets if self.mode == GBUCHI else (self.final,)

    def replace(self, **changes) -> "TimedAutomaton":
        fields = dict(
            alphabet=self.alphabet,
            locations=self.locations,
            clocks=self.clocks,
            initial=self.initial,
            final=self.final,
            transitions=self.transitions,
            mode=self.mode,
            final_sets=self.final_sets,
        )
        fields.update(changes)
        return TimedAutomaton(**fields)


# -- timed words --------------------------------------------------------------


class WordError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class TimedWord:
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple((a, Fraction(t)) for a, t in self.letters)
        prev = Fraction(0)
        for i, (_, t) in enumerate(letters):
            if t < prev:
                raise WordError("timestamps must be nonnegative and weakly increasing", i)
            prev = t
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    @property
    def strict(self) -> bool:
        ts = [t for _, t in self.letters]
        return all(a < b for a, b in zip(ts, ts[1:]))

    def untime(self) -> tuple:
        return tuple(a for a, _ in self.letters)

    def __str__(self):
        return "".join(f"({a},{t})" for a, t in self.letters)


_LETTER = re.compile(r"\s*\(\s*([^,()\s]+)\s*,\s*([0-9]+(?:\.[0-9]+)?(?:/[0-9]+)?)\s*\)")


def parse_time(text: str) -> Fraction:
    """Exact rational from ``p/q`` or decimal notation."""
    return Fraction(text)


def parse_word(text: str) -> TimedWord:
    """Parse ``(a,0)(b,2/5)(a,1.5)``; raises WordError with the offending position."""
    letters = []
    pos = 0
    while pos < len(text) and text[pos:].strip():
        m = _LETTER.match(text, pos)
        if not m:
            raise WordError("malformed timed letter", pos)
        letters.append((m.group(1), parse_time(m.group(2))))
        pos = m.end()
    try:
        return TimedWord(tuple(letters))
    except WordError as exc:
        raise WordError("timestamps must be weakly increasing", exc.position) from None


# -- untimed automata ---------------------------------------------------------


@dataclass(frozen=True)
class UntimedAutomaton:
    alphabet: tuple
    states: tuple
    initial: frozenset
    transitions: tuple  # (source, label or EPS, target)
    finals: tuple  # tuple of frozensets; exactly one unless mode is GBUCHI
    mode: str = BUCHI

    def __post_init__(self):
        object.__setattr__(self, "finals", tuple(frozenset(f) for f in self.finals))
        object.__setattr__(self, "initial", frozenset(self.initial))
        if self.mode == GBUCHI and not self.finals:
            raise AutomatonError("generalised Buechi mode needs at least one final set")
        if self.mode != GBUCHI and len(self.finals) != 1:
            raise AutomatonError("finite/Buechi mode needs exactly one final set")

    @property
    def final(self) -> frozenset:
        return self.finals[0]

    @cached_property
    def succ(self) -> dict:
        out = defaultdict(list)
        for s, a, t in self.transitions:
            out[s].append((a, t))
        return dict(out)

    @property
    def has_eps(self) -> bool:
        return any(a is EPS for _, a, _ in self.transitions)

    def accepts(self, word: Sequence) -> bool:
        """Finite-word membership (finite mode)."""
        current = _eps_closure(self, set(self.initial))
        for a in word:
            nxt = {t for s in current for b, t in self.succ.get(s, ()) if b == a}
            current = _eps_closure(self, nxt)
        return bool(current & self.final)


def _eps_closure(aut: UntimedAutomaton, states: set) -> set:
    stack = list(states)
    seen = set(states)
    while stack:
        s = stack.pop()
        for a, t in aut.succ.get(s, ()):
            if a is EPS and t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


# -- region automaton -----------------------------------------------------------


class _RegionExplorer:
    """Lazy exploration of the region graph of a timed automaton."""

    def __init__(self, aut: TimedAutomaton, m: int):
        if m < aut.max_constant:
            raise AutomatonError(
                f"maximal constant {m} below the automaton's constant {aut.max_constant}"
            )
        self.aut = aut
        self.m = m
        self._guard_memo: dict = {}
        self.loc_index = {loc: i for i, loc in enumerate(aut.locations)}

    def holds(self, idx: int, guard: Constraint, region: Region) -> bool:
        key = (idx, region)
        val = self._guard_memo.get(key)
        if val is None:
            val = guard.evaluate(region.valuation)
            self._guard_memo[key] = val
        return val

    def initial_states(self):
        r0 = zero_region(self.aut.clocks, self.m)
        return [(loc, r0) for loc in sorted(self.aut.initial, key=self.loc_index.get)]

    def steps(self, state):
        """Yield (label, target, chain index, transition) for each discrete step."""
        loc, region = state
        trs = self.aut.outgoing.get(loc, ())
        if not trs:
            return
        for i, r2 in enumerate(successor_chain(region)):
            for tr in trs:
                if self.holds(id(tr), tr.guard, r2):
                    yield tr.label, (tr.target, region_reset(r2, tr.resets)), i, tr

    def sort_key(self, state):
        return (self.loc_index[state[0]], state[1].key)


def region_automaton(aut: TimedAutomaton, m: int | None = None) -> UntimedAutomaton:
    """Untimed automaton over (location, region) recognising untime(L(aut))."""
    m = aut.max_constant if m is None else m
    ex = _RegionExplorer(aut, m)
    init = ex.initial_states()
    seen = set(init)
    queue = deque(init)
    edges = set()
    while queue:
        s = queue.popleft()
        for label, t, _, _ in ex.steps(s):
            edges.add((s, label, t))
            if t not in seen:
                seen.add(t)
                queue.append(t)
    states = tuple(sorted(seen, key=ex.sort_key))
    order = {s: i for i, s in enumerate(states)}
    trans = tuple(
        sorted(edges, key=lambda e: (order[e[0]], order[e[2]], repr(e[1])))
    )
    finals = tuple(
        frozenset(s for s in states if s[0] in fs) for fs in aut.acceptance_sets
    )
    mode = aut.mode
    return UntimedAutomaton(aut.alphabet, states, frozenset(init), trans, finals, mode)


# -- concrete reconstruction of region paths ------------------------------------


def _concretise(aut: TimedAutomaton, m: int, path: list) -> list:
    """Turn a list of (state, chain index, transition) into timed steps.

    Returns [(label, time)] including epsilon steps.
    """
    values = [Fraction(0)] * len(aut.clocks)
    now = Fraction(0)
    out = []
    for (loc, region), idx, tr in path:
        for _ in range(idx):
            nxt = _successor_values(values, m)
            if nxt is None:
                break
            now += nxt[0] - values[0] if values else Fraction(0)
            values = list(nxt)
        if not aut.clocks:
            pass
        val = dict(zip(aut.clocks, values))
        assert tr.guard.evaluate(val), "region path does not concretise"
        out.append((tr.label, now))
        values = [Fraction(0) if c in tr.resets else v for c, v in zip(aut.clocks, values)]
    return out


@dataclass(frozen=True)
class EmptinessResult:
    empty: bool
    path: tuple = ()  # untimed labels (epsilon included as None)
    word: TimedWord | None = None  # finite mode: concrete witness (epsilon removed)
    stem: tuple = ()  # Buechi mode: labels of a lasso witness
    loop: tuple = ()

    def __bool__(self):
        return self.empty


def nta_emptiness(aut: TimedAutomaton, m: int | None = None) -> EmptinessResult:
    """Emptiness of L(aut); a witness accompanies nonempty answers."""
    m = aut.max_constant if m is None else m
    ex = _RegionExplorer(aut, m)
    init = ex.initial_states()
    parent: dict = {s: None for s in init}
    queue = deque(init)
    if aut.mode == FINITE:
        while queue:
            s = queue.popleft()
            if s[0] in aut.final:
                steps = _trace(parent, s)
                timed = _concretise(aut, m, steps)
                word = TimedWord(tuple((a, t) for a, t in timed if a is not EPS))
                return EmptinessResult(False, tuple(a for a, _ in timed), word)
            for label, t, idx, tr in ex.steps(s):
                if t not in parent:
                    parent[t] = (s, idx, tr)
                    queue.append(t)
        return EmptinessResult(True)
    # Buechi / generalised Buechi: accepting SCC containing a symbol edge
    graph = nx.DiGraph()
    graph.add_nodes_from(init)
    while queue:
        s = queue.popleft()
        for label, t, idx, tr in ex.steps(s):
            data = graph.get_edge_data(s, t)
            if data is None or (data["label"] is EPS and label is not EPS):
                graph.add_edge(s, t, label=label, idx=idx, tr=tr)
            if t not in parent:
                parent[t] = (s, idx, tr)
                queue.append(t)
    for comp in nx.strongly_connected_components(graph):
        sub = graph.subgraph(comp)
        sym = [(u, v) for u, v, d in sub.edges(data=True) if d["label"] is not EPS]
        if not sym:
            continue
        if not all(any(s[0] in fs for s in comp) for fs in aut.acceptance_sets):
            continue
        stem_steps = _trace(parent, next(iter(comp)))
        loop = _cycle_labels(sub, sym[0])
        return EmptinessResult(
            False,
            stem=tuple(tr.label for _, _, tr in stem_steps),
            loop=tuple(loop),
        )
    return EmptinessResult(True)


def _trace(parent: dict, s) -> list:
    steps = []
    while parent[s] is not None:
        prev, idx, tr = parent[s]
        steps.append((prev, idx, tr))
        s = prev
    steps.reverse()
    return steps


def _cycle_labels(sub: nx.DiGraph, edge) -> list:
    u, v = edge
    back = nx.shortest_path(sub, v, u)
    labels = [sub.edges[u, v]["label"]]
    labels += [sub.edges[a, b]["label"] for a, b in zip(back, back[1:])]
    return labels


# -- membership -----------------------------------------------------------------


def _scale(c: Constraint, factor: int) -> Constraint:
    if isinstance(c, Atom):
        return Atom(c.left, c.op, c.const * factor, c.right)
    if hasattr(c, "args"):
        return type(c)(tuple(_scale(a, factor) for a in c.args))
    if hasattr(c, "arg"):
        return type(c)(_scale(c.arg, factor))
    return c


def scale_constants(aut: TimedAutomaton, factor: int) -> TimedAutomaton:
    """Multiply every guard constant by ``factor``."""
    trs = tuple(
        Transition(t.source, t.label, _scale(t.guard, factor), t.resets, t.target)
        for t in aut.transitions
    )
    return aut.replace(transitions=trs)


def word_automaton(word: TimedWord, alphabet: Sequence, clock: str = "_w") -> TimedAutomaton:
    """One-clock DTA accepting exactly ``word`` (integer timestamps required)."""
    n = len(word)
    trs = []
    for i, (a, t) in enumerate(word):
        if t.denominator != 1:
            raise AutomatonError("word automaton needs integer timestamps")
        trs.append(Transition(i, a, Atom(clock, "=", int(t)), frozenset(), i + 1))
    return TimedAutomaton(tuple(alphabet), tuple(range(n + 1)), (clock,), {0}, {n}, trs)


def _check_symbols(aut: TimedAutomaton, word: TimedWord):
    symbols = set(aut.alphabet)
    for i, (a, _) in enumerate(word):
        if a not in symbols:
            raise WordError(f"symbol {a!r} outside the alphabet", i)


def accepts_finite(aut: TimedAutomaton, word: TimedWord, method: str = "auto") -> bool:
    """Finite-word membership.

    ``method="product"`` scales timestamps and constants to integers and tests
    emptiness of the product with the word's one-clock automaton.
    ``method="direct"`` (epsilon-free automata only) tracks the finite set of
    concrete configurations.  ``auto`` picks ``direct`` when possible.
    """
    if aut.mode != FINITE:
        raise AutomatonError("finite-word membership needs a finite-mode automaton")
    word = word if isinstance(word, TimedWord) else TimedWord(tuple(word))
    _check_symbols(aut, word)
    if method == "auto":
        method = "product" if aut.has_eps else "direct"
    if method == "direct":
        if aut.has_eps:
            raise AutomatonError("direct membership needs an epsilon-free automaton")
        return _accepts_direct(aut, word)
    denom = math.lcm(1, *(t.denominator for _, t in word))
    scaled_word = TimedWord(tuple((a, t * denom) for a, t in word))
    clock = "_w"
    while clock in aut.clocks:
        clock += "_"
    wa = word_automaton(scaled_word, aut.alphabet, clock)
    prod = product(scale_constants(aut, denom), wa)
    bound = max(prod.max_constant, 0)
    return not nta_emptiness(prod, bound).empty


def _accepts_direct(aut: TimedAutomaton, word: TimedWord) -> bool:
    zero = tuple(Fraction(0) for _ in aut.clocks)
    configs = {(loc, zero) for loc in aut.initial}
    prev = Fraction(0)
    for a, t in word:
        delta = t - prev
        prev = t
        nxt = set()
        for loc, vals in configs:
            moved = tuple(v + delta for v in vals)
            val = dict(zip(aut.clocks, moved))
            for tr in aut.outgoing.get(loc, ()):
                if tr.label == a and tr.guard.evaluate(val):
                    nxt.add(
                        (tr.target, tuple(Fraction(0) if c in tr.resets else v
                                          for c, v in zip(aut.clocks, moved)))
                    )
        configs = nxt
        if not configs:
            return False
    return any(loc in aut.final for loc, _ in configs)


# -- determinism and regionisation ---------------------------------------------


def _regions_for(aut: TimedAutomaton, m: int | None = None) -> list[Region]:
    m = aut.max_constant if m is None else m
    return enumerate_regions(len(aut.clocks), m, aut.clocks)


def is_deterministic(aut: TimedAutomaton) -> bool:
    if aut.has_eps or len(aut.initial) != 1:
        return False
    regions = _regions_for(aut)
    groups = defaultdict(list)
    for tr in aut.transitions:
        groups[(tr.source, tr.label)].append(tr)
    for trs in groups.values():
        for t1, t2 in itertools.combinations(trs, 2):
            if t1.resets == t2.resets and t1.target == t2.target:
                continue
            both = conj(t1.guard, t2.guard)
            if any(r.satisfies(both) for r in regions):
                return False
    return True


SINK = "__sink__"


def _fresh(name: str, taken: Iterable) -> str:
    taken = set(taken)
    while name in taken:
        name += "'"
    return name


def regionise(dta: TimedAutomaton, m: int | None = None) -> TimedAutomaton:
    """Equivalent DTA whose guards are characteristic region constraints,
    with exactly one rule per (location, symbol, region)."""
    if not is_deterministic(dta):
        raise AutomatonError("regionise needs a deterministic timed automaton")
    m = dta.max_constant if m is None else m
    if m < dta.max_constant:
        raise AutomatonError("maximal constant below the automaton's constants")
    regions = _regions_for(dta, m)
    sink = None
    trs = []
    locations = list(dta.locations)
    for loc in dta.locations:
        outs = dta.outgoing.get(loc, ())
        for a in dta.alphabet:
            cands = [t for t in outs if t.label == a]
            for r in regions:
                hit = next((t for t in cands if r.satisfies(t.guard)), None)
                if hit is None:
                    if sink is None:
                        sink = _fresh(SINK, locations)
                    trs.append(Transition(loc, a, characteristic_constraint(r), frozenset(), sink))
                else:
                    trs.append(
                        Transition(loc, a, characteristic_constraint(r), hit.resets, hit.target)
                    )
    if sink is not None:
        locations.append(sink)
        for a in dta.alphabet:
            for r in regions:
                trs.append(Transition(sink, a, characteristic_constraint(r), frozenset(), sink))
    return dta.replace(locations=tuple(locations), transitions=tuple(trs))


def is_regionised(aut: TimedAutomaton, m: int | None = None) -> bool:
    if not is_deterministic(aut):
        return False
    m = aut.max_constant if m is None else m
    regions = _regions_for(aut, m)
    chars = {characteristic_constraint(r) for r in regions}
    if any(tr.guard not in chars for tr in aut.transitions):
        return False
    for loc in aut.locations:
        for a in aut.alphabet:
            got = {tr.guard for tr in aut.outgoing.get(loc, ()) if tr.label == a}
            if got != chars:
                return False
    return True


def complete_dta(dta: TimedAutomaton) -> TimedAutomaton:
    """Add a non-final sink so every (location, symbol) is total."""
    regions = _regions_for(dta)
    sink = _fresh(SINK, dta.locations)
    trs = list(dta.transitions)
    used_sink = False
    for loc in dta.locations:
        for a in dta.alphabet:
            guards = [t.guard for t in dta.outgoing.get(loc, ()) if t.label == a]
            missing = [r for r in regions if not any(r.satisfies(g) for g in guards)]
            if missing:
                used_sink = True
                guard = TRUE if len(missing) == len(regions) else disj(
                    *(characteristic_constraint(r) for r in missing)
                )
                trs.append(Transition(loc, a, guard, frozenset(), sink))
    if not used_sink:
        return dta
    for a in dta.alphabet:
        trs.append(Transition(sink, a, TRUE, frozenset(), sink))
    return dta.replace(locations=dta.locations + (sink,), transitions=tuple(trs))


def complement_dta(dta: TimedAutomaton) -> TimedAutomaton:
    if not is_deterministic(dta):
        raise AutomatonError("complement_dta needs a deterministic timed automaton")
    if dta.mode != FINITE:
        raise AutomatonError("complement_dta works on finite-word automata")
    full = complete_dta(dta)
    return full.replace(final=frozenset(full.locations) - full.final)


# -- boolean closure --------------------------------------------------------------


def _rename_clocks(aut: TimedAutomaton, mapping: dict) -> TimedAutomaton:
    if all(k == v for k, v in mapping.items()):
        return aut
    trs = tuple(
        Transition(t.source, t.label, t.guard.rename(mapping),
                   frozenset(mapping.get(c, c) for c in t.resets), t.target)
        for t in aut.transitions
    )
    return aut.replace(clocks=tuple(mapping.get(c, c) for c in aut.clocks), transitions=trs)


def _disjoint_clocks(a: TimedAutomaton, b: TimedAutomaton) -> TimedAutomaton:
    taken = set(a.clocks) | set(b.clocks)
    mapping = {}
    for c in b.clocks:
        if c in a.clocks:
            new = _fresh(c + "_2", taken)
            taken.add(new)
            mapping[c] = new
        else:
            mapping[c] = c
    return _rename_clocks(b, mapping)


def product(a: TimedAutomaton, b: TimedAutomaton, shared_clocks: Iterable[str] = ()) -> TimedAutomaton:
    """Intersection; epsilon steps interleave.

    Clocks listed in ``shared_clocks`` are identified between the operands; this
    is only sound when both operands reset them on exactly the same letters.
    Buechi operands yield a generalised Buechi product.
    """
    if set(a.alphabet) != set(b.alphabet):
        raise AutomatonError("product needs equal alphabets")
    if a.mode != b.mode and FINITE in (a.mode, b.mode):
        raise AutomatonError("cannot mix finite and infinite acceptance")
    shared = set(shared_clocks)
    if shared:
        rest = b.replace(clocks=tuple(c for c in b.clocks))
        taken = (set(a.clocks) | set(b.clocks))
        mapping = {}
        for c in b.clocks:
            if c in a.clocks and c not in shared:
                new = _fresh(c + "_2", taken)
                taken.add(new)
                mapping[c] = new
            else:
                mapping[c] = c
        b = _rename_clocks(rest, mapping)
    else:
        b = _disjoint_clocks(a, b)
    trs = []
    for p in a.locations:
        for q in b.locations:
            for ta in a.outgoing.get(p, ()):
                if ta.is_eps:
                    trs.append(Transition((p, q), EPS, ta.guard, ta.resets, (ta.target, q)))
                    continue
                for tb in b.outgoing.get(q, ()):
                    if tb.label == ta.label:
                        if shared:
                            _check_shared(ta, tb, shared)
                        trs.append(Transition(
                            (p, q), ta.label, conj(ta.guard, tb.guard),
                            ta.resets | tb.resets, (ta.target, tb.target)))
            for tb in b.outgoing.get(q, ()):
                if tb.is_eps:
                    trs.append(Transition((p, q), EPS, tb.guard, tb.resets, (p, tb.target)))
    locs = tuple((p, q) for p in a.locations for q in b.locations)
    init = {(p, q) for p in a.initial for q in b.initial}
    clocks = tuple(dict.fromkeys(a.clocks + b.clocks))
    if a.mode == FINITE:
        fin = {(p, q) for p in a.final for q in b.final}
        return TimedAutomaton(a.alphabet, locs, clocks, init, fin, trs, FINITE)
    sets = tuple(
        frozenset((p, q) for p in fs for q in b.locations) for fs in a.acceptance_sets
    ) + tuple(
        frozenset((p, q) for p in a.locations for q in fs) for fs in b.acceptance_sets
    )
    return _trim(TimedAutomaton(a.alphabet, locs, clocks, init, frozenset(), trs, GBUCHI, sets))


def _check_shared(ta: Transition, tb: Transition, shared: set):
    if (ta.resets & shared) != (tb.resets & shared):
        raise AutomatonError("shared clocks reset inconsistently in product")


def _trim(aut: TimedAutomaton) -> TimedAutomaton:
    """Drop locations unreachable in the location graph."""
    reach = set(aut.initial)
    stack = list(aut.initial)
    while stack:
        p = stack.pop()
        for tr in aut.outgoing.get(p, ()):
            if tr.target not in reach:
                reach.add(tr.target)
                stack.append(tr.target)
    if len(reach) == len(aut.locations):
        return aut
    locs = tuple(l for l in aut.locations if l in reach)
    trs = tuple(t for t in aut.transitions if t.source in reach)
    return aut.replace(
        locations=locs,
        transitions=trs,
        final=aut.final & reach,
        final_sets=tuple(fs & reach for fs in aut.final_sets),
    )


def active_clocks(aut: TimedAutomaton) -> dict:
    """Clocks that may be read at each location before their next reset."""
    active = {l: set() for l in aut.locations}
    changed = True
    while changed:
        changed = False
        for t in aut.transitions:
            need = set(t.guard.clocks()) | (active[t.target] - t.resets)
            if not need <= active[t.source]:
                active[t.source] |= need
                changed = True
    return {l: frozenset(v) for l, v in active.items()}


def reset_inactive_clocks(aut: TimedAutomaton) -> TimedAutomaton:
    """Reset every clock as soon as it is dead; the language is unchanged and
    the region graph only tracks clocks that still matter."""
    active = active_clocks(aut)
    every = frozenset(aut.clocks)
    trs = tuple(
        Transition(t.source, t.label, t.guard, t.resets | (every - active[t.target]), t.target)
        for t in aut.transitions
    )
    return aut.replace(transitions=trs)


def trim(aut: TimedAutomaton) -> TimedAutomaton:
    return _trim(aut)


def union(a: TimedAutomaton, b: TimedAutomaton, share_clocks: bool = True) -> TimedAutomaton:
    """Disjoint union; the second operand reuses the first one's clock names
    unless ``share_clocks`` is off (then clock names are kept as they are)."""
    if set(a.alphabet) != set(b.alphabet):
        raise AutomatonError("union needs equal alphabets")
    if a.mode != b.mode or a.mode == GBUCHI:
        raise AutomatonError("union needs operands of the same finite/Buechi mode")
    # only one branch runs, so clocks can be shared positionally
    extra = [c for c in b.clocks if c not in a.clocks]
    free = [c for c in a.clocks if c not in b.clocks] if share_clocks else []
    mapping = {c: c for c in b.clocks}
    for c, target in zip(extra, free):
        mapping[c] = target
    b = _rename_clocks(b, mapping)
    tag_a = {l: (0, l) for l in a.locations}
    tag_b = {l: (1, l) for l in b.locations}
    trs = [Transition(tag_a[t.source], t.label, t.guard, t.resets, tag_a[t.target]) for t in a.transitions]
    trs += [Transition(tag_b[t.source], t.label, t.guard, t.resets, tag_b[t.target]) for t in b.transitions]
    return TimedAutomaton(
        a.alphabet,
        tuple(tag_a.values()) + tuple(tag_b.values()),
        tuple(dict.fromkeys(a.clocks + b.clocks)),
        {tag_a[l] for l in a.initial} | {tag_b[l] for l in b.initial},
        {tag_a[l] for l in a.final} | {tag_b[l] for l in b.final},
        trs,
        a.mode,
    )


def empty_automaton(alphabet: Sequence, mode: str = FINITE) -> TimedAutomaton:
    return TimedAutomaton(tuple(alphabet), ("q0",), (), {"q0"}, set(), (), mode)


def universal_automaton(alphabet: Sequence, mode: str = FINITE) -> TimedAutomaton:
    trs = tuple(Transition("q0", a, TRUE, frozenset(), "q0") for a in alphabet)
    return TimedAutomaton(tuple(alphabet), ("q0",), (), {"q0"}, {"q0"}, trs, mode)


def inverse_projection(aut: TimedAutomaton, enrich: Sequence) -> TimedAutomaton:
    """Lift to alphabet Sigma x enrich: each a-rule reads every (a, b)."""
    alphabet = tuple((a, b) for a in aut.alphabet for b in enrich)
    trs = []
    for t in aut.transitions:
        if t.is_eps:
            trs.append(t)
        else:
            trs.extend(Transition(t.source, (t.label, b), t.guard, t.resets, t.target) for b in enrich)
    return aut.replace(alphabet=alphabet, transitions=tuple(trs))


def relabel(aut: TimedAutomaton, alphabet: Sequence, expand) -> TimedAutomaton:
    """Replace every symbol ``a`` by the letters ``expand(a)`` of a new alphabet."""
    trs = []
    for t in aut.transitions:
        if t.is_eps:
            trs.append(t)
        else:
            trs.extend(Transition(t.source, b, t.guard, t.resets, t.target) for b in expand(t.label))
    return aut.replace(alphabet=tuple(alphabet), transitions=tuple(trs))


ACCEPT_SINK = "__top__"


def suffix_omega(aut: TimedAutomaton) -> TimedAutomaton:
    """Buechi automaton for L(aut) followed by an arbitrary infinite word."""
    if aut.mode != FINITE:
        raise AutomatonError("suffix_omega needs a finite-word automaton")
    top = _fresh(ACCEPT_SINK, aut.locations)
    trs = list(aut.transitions)
    trs += [Transition(f, EPS, TRUE, frozenset(), top) for f in sorted(aut.final, key=repr)]
    trs += [Transition(top, a, TRUE, frozenset(), top) for a in aut.alphabet]
    return aut.replace(
        locations=aut.locations + (top,),
        final=frozenset({top}),
        transitions=tuple(trs),
        mode=BUCHI,
    )


def eps_in_language(aut: TimedAutomaton) -> bool:
    """Whether the empty word is accepted (epsilon steps at time 0)."""
    zero = {c: Fraction(0) for c in aut.clocks}
    # at time 0 every clock stays 0, so only epsilon guards at zero matter
    locs = set(aut.initial)
    stack = list(locs)
    while stack:
        p = stack.pop()
        for tr in aut.outgoing.get(p, ()):
            if tr.is_eps and tr.guard.evaluate(zero) and tr.target not in locs:
                locs.add(tr.target)
                stack.append(tr.target)
    return bool(locs & aut.final)


# -- JSON documents -------------------------------------------------------------


def _sym_to_str(a) -> str:
    if isinstance(a, tuple):
        return "|".join(_sym_to_str(x) for x in a)
    return str(a)


def _sym_from_str(s: str):
    return tuple(s.split("|")) if "|" in s else s


def _loc_to_str(l) -> str:
    if isinstance(l, tuple):
        return "(" + ",".join(_loc_to_str(x) for x in l) + ")"
    if isinstance(l, frozenset):
        return "{" + ",".join(sorted(_loc_to_str(x) for x in l)) + "}"
    return str(l)


def to_document(aut: TimedAutomaton) -> dict:
    if aut.mode == GBUCHI:
        raise AutomatonError("generalised Buechi automata have no JSON form")
    names = {l: _loc_to_str(l) for l in aut.locations}
    if len(set(names.values())) != len(names):
        raise AutomatonError("location names collide after stringification")
    trs = [
        {
            "from": names[t.source],
            "label": "eps" if t.is_eps else _sym_to_str(t.label),
            "guard": str(t.guard),
            "resets": sorted(t.resets),
            "to": names[t.target],
        }
        for t in aut.transitions
    ]
    trs.sort(key=lambda d: (d["from"], d["label"], d["to"], d["guard"], d["resets"]))
    return {
        "alphabet": sorted(_sym_to_str(a) for a in aut.alphabet),
        "clocks": list(aut.clocks),
        "locations": sorted(names.values()),
        "initial": sorted(names[l] for l in aut.initial),
        "final": sorted(names[l] for l in aut.final),
        "mode": aut.mode,
        "transitions": trs,
    }


def from_document(doc: dict) -> TimedAutomaton:
    try:
        trs = []
        for d in doc["transitions"]:
            label = EPS if d["label"] == "eps" else _sym_from_str(d["label"])
            trs.append(Transition(d["from"], label, parse_constraint(d.get("guard", "true")),
                                  frozenset(d.get("resets", [])), d["to"]))
        return TimedAutomaton(
            tuple(_sym_from_str(a) for a in doc["alphabet"]),
            tuple(doc["locations"]),
            tuple(doc.get("clocks", [])),
            frozenset(doc["initial"]),
            frozenset(doc.get("final", [])),
            tuple(trs),
            doc.get("mode", FINITE),
        )
    except (KeyError, TypeError, ConstraintError) as exc:
        raise AutomatonError(f"malformed automaton document: {exc}") from exc


def dumps(aut: TimedAutomaton) -> str:
    return json.dumps(to_document(aut), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> TimedAutomaton:
    return from_document(json.loads(text))
