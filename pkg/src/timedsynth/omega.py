"""Untimed omega-automata: epsilon removal, degeneralisation, Safra-Piterman
determinisation to min-even parity automata, and lasso membership."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .automata import BUCHI, EPS, FINITE, GBUCHI, AutomatonError, UntimedAutomaton

DEFAULT_STATE_CAP = 200_000


class ResourceLimitError(RuntimeError):
    """Raised when a construction exceeds its configured state budget."""

    def __init__(self, what: str, cap: int, stage: str | None = None):
        self.what = what
        self.cap = cap
        self.stage = stage
        where = f" during {stage}" if stage else ""
        super().__init__(f"{what} exceeded the state cap of {cap}{where}")


@dataclass(frozen=True)
class LassoWord:
    stem: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def letter(self, i: int):
        if i < len(self.stem):
            return self.stem[i]
        return self.loop[(i - len(self.stem)) % len(self.loop)]


@dataclass
class ParityAutomaton:
    """Total deterministic automaton with min-even parity acceptance.

    States are ``0..n-1``; ``delta[q][i]`` is the successor on ``alphabet[i]``.
    """

    alphabet: tuple
    initial: int
    delta: list
    priority: list
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.index = {a: i for i, a in enumerate(self.alphabet)}

    @property
    def size(self) -> int:
        return len(self.delta)

    def step(self, q: int, a) -> int:
        return self.delta[q][self.index[a]]

    def complement(self) -> "ParityAutomaton":
        return ParityAutomaton(self.alphabet, self.initial, self.delta,
                               [p + 1 for p in self.priority], self.labels)


# -- epsilon removal / degeneralisation ------------------------------------------


def _reindex(aut: UntimedAutomaton):
    index = {s: i for i, s in enumerate(aut.states)}
    return index


def remove_epsilon(aut: UntimedAutomaton) -> UntimedAutomaton:
    """Equivalent epsilon-free automaton on infinite words.

    States become (state, mask) where bit i of mask records a visit to final
    set i along the epsilon path that led there. Runs ending in epsilon-only
    cycles disappear.
    """
    if aut.mode == FINITE:
        raise AutomatonError("remove_epsilon works on Buechi automata")
    if not aut.has_eps:
        return aut
    finals = aut.finals
    eps_succ: dict = {}
    sym_succ: dict = {}
    for s, a, t in aut.transitions:
        (eps_succ if a is EPS else sym_succ).setdefault(s, []).append((a, t))

    def own(s) -> int:
        return sum(1 << i for i, fs in enumerate(finals) if s in fs)

    closure_memo: dict = {}

    def closure(s, mask: int):
        key = (s, mask)
        if key in closure_memo:
            return closure_memo[key]
        start = (s, mask | own(s))
        seen = {start}
        stack = [start]
        while stack:
            p, mk = stack.pop()
            for _, t in eps_succ.get(p, ()):
                nxt = (t, mk | own(t))
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        closure_memo[key] = seen
        return seen

    init = set()
    for s in aut.initial:
        init |= closure(s, 0)
    states = set(init)
    queue = deque(init)
    edges = set()
    while queue:
        p, mk = queue.popleft()
        for a, t in sym_succ.get(p, ()):
            for nxt in closure(t, 0):
                edges.add(((p, mk), a, nxt))
                if nxt not in states:
                    states.add(nxt)
                    queue.append(nxt)
    order = _state_order(aut)
    st = tuple(sorted(states, key=lambda x: (order[x[0]], x[1])))
    new_finals = tuple(frozenset(x for x in st if x[1] >> i & 1) for i in range(len(finals)))
    return UntimedAutomaton(aut.alphabet, st, frozenset(init), tuple(sorted(
        edges, key=lambda e: (order[e[0][0]], e[0][1], order[e[2][0]], e[2][1], repr(e[1])))),
        new_finals, aut.mode)


def _state_order(aut: UntimedAutomaton) -> dict:
    return {s: i for i, s in enumerate(aut.states)}


def degeneralize(aut: UntimedAutomaton) -> UntimedAutomaton:
    """Counter construction turning generalised Buechi into Buechi."""
    if aut.mode == BUCHI:
        return aut
    if aut.mode != GBUCHI:
        raise AutomatonError("degeneralize needs an omega-automaton")
    if aut.has_eps:
        raise AutomatonError("remove epsilon transitions before degeneralising")
    n = len(aut.finals)
    if n == 1:
        return UntimedAutomaton(aut.alphabet, aut.states, aut.initial, aut.transitions,
                                aut.finals, BUCHI)
    finals = aut.finals

    def bump(s, i):
        return (i + 1) % n if s in finals[i] else i

    init = {(s, 0) for s in aut.initial}
    seen = set(init)
    queue = deque(init)
    edges = []
    while queue:
        s, i = queue.popleft()
        j = bump(s, i)
        for a, t in aut.succ.get(s, ()):
            nxt = (t, j)
            edges.append(((s, i), a, nxt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    order = _state_order(aut)
    st = tuple(sorted(seen, key=lambda x: (order[x[0]], x[1])))
    fin = frozenset(x for x in st if x[1] == 0 and x[0] in finals[0])
    return UntimedAutomaton(aut.alphabet, st, frozenset(init), tuple(edges), (fin,), BUCHI)


def prune(aut: UntimedAutomaton) -> UntimedAutomaton:
    """Keep reachable states from which an accepting lasso is still possible."""
    if aut.mode != BUCHI or aut.has_eps:
        raise AutomatonError("prune expects an epsilon-free Buechi automaton")
    g = nx.DiGraph()
    g.add_nodes_from(aut.states)
    g.add_edges_from((s, t) for s, _, t in aut.transitions)
    reach = set()
    for s in aut.initial:
        if s not in reach:
            reach |= nx.descendants(g, s) | {s}
    g = g.subgraph(reach)
    good = set()
    for comp in nx.strongly_connected_components(g):
        if comp & aut.final and (len(comp) > 1 or g.has_edge(next(iter(comp)), next(iter(comp)))):
            good |= comp
    live = set(good)
    for s in good:
        live |= nx.ancestors(g, s)
    states = tuple(s for s in aut.states if s in live)
    trans = tuple(e for e in aut.transitions if e[0] in live and e[2] in live)
    return UntimedAutomaton(aut.alphabet, states, aut.initial & live, trans,
                            (aut.final & live,), BUCHI)


def bisim_quotient(aut: UntimedAutomaton) -> UntimedAutomaton:
    """Quotient an epsilon-free Buechi automaton by forward bisimulation that
    respects acceptance; states are renamed to block indices."""
    if aut.mode != BUCHI or aut.has_eps:
        raise AutomatonError("bisim_quotient expects an epsilon-free Buechi automaton")
    order = {s: i for i, s in enumerate(aut.states)}
    succ = {s: [] for s in aut.states}
    for s, a, t in aut.transitions:
        succ[s].append((a, t))
    block = {s: int(s in aut.final) for s in aut.states}
    count = len(set(block.values()))
    while True:
        sigs = {}
        new = {}
        for s in aut.states:
            sig = (block[s], frozenset((a, block[t]) for a, t in succ[s]))
            new[s] = sigs.setdefault(sig, len(sigs))
        block = new
        if len(sigs) == count:
            break
        count = len(sigs)
    # number blocks by their first member for a stable result
    first = {}
    for s in aut.states:
        first.setdefault(block[s], order[s])
    rank = {b: i for i, b in enumerate(sorted(first, key=first.get))}
    states = tuple(range(len(rank)))
    trans = sorted({(rank[block[s]], a, rank[block[t]]) for s, a, t in aut.transitions},
                   key=lambda e: (e[0], e[2], repr(e[1])))
    return UntimedAutomaton(aut.alphabet, states,
                            frozenset(rank[block[s]] for s in aut.initial), tuple(trans),
                            (frozenset(rank[block[s]] for s in aut.final),), BUCHI)


# -- determinisation ----------------------------------------------------------------


class _Safra:
    """Safra-Piterman trees; a tree is a tuple of (name, parent, label-bitmask)
    sorted by name, names dense from 1 and ordered by age."""

    def __init__(self, aut: UntimedAutomaton):
        self.aut = aut
        self.states = list(aut.states)
        self.sindex = {s: i for i, s in enumerate(self.states)}
        self.alphabet = tuple(aut.alphabet)
        self.fmask = 0
        for s in aut.final:
            self.fmask |= 1 << self.sindex[s]
        succ = [[0] * len(self.alphabet) for _ in self.states]
        aidx = {a: i for i, a in enumerate(self.alphabet)}
        for s, a, t in aut.transitions:
            succ[self.sindex[s]][aidx[a]] |= 1 << self.sindex[t]
        self.succ = succ
        self._post: dict = {}
        n = max(1, len(self.states))
        self.max_priority = 4 * n + 1

    def post(self, mask: int, ai: int) -> int:
        key = (mask, ai)
        got = self._post.get(key)
        if got is None:
            got = 0
            m = mask
            succ = self.succ
            while m:
                low = m & -m
                got |= succ[low.bit_length() - 1][ai]
                m ^= low
            self._post[key] = got
        return got

    def initial(self) -> tuple:
        mask = 0
        for s in self.aut.initial:
            mask |= 1 << self.sindex[s]
        return ((1, 0, mask),) if mask else ()

    def step(self, tree: tuple, ai: int) -> tuple[tuple, int]:
        if not tree:
            return (), self.max_priority
        parent = {}
        label = {}
        for name, par, lab in tree:
            parent[name] = par
            label[name] = lab
        nxt = tree[-1][0] + 1
        for name, _, lab in tree:
            hit = lab & self.fmask
            if hit:
                parent[nxt] = name
                label[nxt] = hit
                nxt += 1
        for name in label:
            label[name] = self.post(label[name], ai)
        children: dict = {}
        for name in sorted(parent):
            children.setdefault(parent[name], []).append(name)
        # horizontal merge: a state stays only in the oldest branch holding it
        order = self._preorder(children)
        forbidden = {0: 0}
        older = {}
        for name in order:
            par = parent[name]
            f = forbidden[par] | older.get(par, 0)
            label[name] &= ~f
            forbidden[name] = f
            older[par] = older.get(par, 0) | label[name]
        removed = []
        alive = set()
        for name in order:
            par = parent[name]
            if label[name] == 0 or (par != 0 and par not in alive):
                removed.append(name)
            else:
                alive.add(name)
        green = []
        for name in order:
            if name not in alive:
                continue
            kids = [c for c in children.get(name, ()) if c in alive]
            if kids:
                union = 0
                for c in kids:
                    union |= label[c]
                if union == label[name]:
                    green.append(name)
                    for d in self._descendants(name, children):
                        if d in alive:
                            alive.discard(d)
                            removed.append(d)
        prio = self.max_priority
        if removed:
            prio = min(prio, 2 * min(removed) - 1)
        if green:
            prio = min(prio, 2 * min(green))
        names = sorted(alive)
        rename = {old: i + 1 for i, old in enumerate(names)}
        rename[0] = 0
        new_tree = tuple((rename[n], rename[parent[n]], label[n]) for n in names)
        return new_tree, prio

    @staticmethod
    def _preorder(children) -> list:
        out = []
        stack = [1]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(children.get(n, ())))
        return out

    @staticmethod
    def _descendants(name, children) -> list:
        out = []
        stack = list(children.get(name, ()))
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(children.get(n, ()))
        return out


def determinize(aut: UntimedAutomaton, cap: int = DEFAULT_STATE_CAP) -> ParityAutomaton:
    """Deterministic min-even parity automaton for an epsilon-free Buechi automaton."""
    if aut.mode != BUCHI:
        raise AutomatonError("determinize needs a Buechi automaton")
    if aut.has_eps:
        raise AutomatonError("determinize needs an epsilon-free automaton")
    sf = _Safra(aut)
    start = (sf.initial(), sf.max_priority)
    index = {start: 0}
    labels = [start]
    delta = []
    nletters = len(sf.alphabet)
    i = 0
    while i < len(labels):
        tree = labels[i][0]
        row = []
        for ai in range(nletters):
            nxt = sf.step(tree, ai)
            j = index.get(nxt)
            if j is None:
                j = len(labels)
                if j >= cap:
                    raise ResourceLimitError("determinisation", cap)
                index[nxt] = j
                labels.append(nxt)
            row.append(j)
        delta.append(row)
        i += 1
    priority = [p for _, p in labels]
    return ParityAutomaton(sf.alphabet, 0, delta, priority, labels)


def minimize_priorities(p: ParityAutomaton) -> ParityAutomaton:
    """Compress the priority range while keeping every parity and order."""
    used = sorted(set(p.priority))
    mapping = {}
    cur = -1
    for v in used:
        want = v % 2
        cur += 1
        if cur % 2 != want:
            cur += 1
        mapping[v] = cur
    return ParityAutomaton(p.alphabet, p.initial, p.delta,
                           [mapping[v] for v in p.priority], p.labels)


# -- lasso membership -----------------------------------------------------------------


def accepts_lasso(aut, word: LassoWord) -> bool:
    if isinstance(aut, ParityAutomaton):
        return _parity_lasso(aut, word)
    if aut.mode == FINITE:
        raise AutomatonError("lasso membership needs an omega-automaton")
    return _nba_lasso(aut, word)


def _parity_lasso(p: ParityAutomaton, word: LassoWord) -> bool:
    q = p.initial
    for a in word.stem:
        q = p.step(q, a)
    seen = {}
    trace = []
    pos = 0
    while (q, pos) not in seen:
        seen[(q, pos)] = len(trace)
        q = p.step(q, word.loop[pos])
        trace.append(p.priority[q])
        pos = (pos + 1) % len(word.loop)
    return min(trace[seen[(q, pos)]:]) % 2 == 0


def _nba_lasso(aut: UntimedAutomaton, word: LassoWord) -> bool:
    stem, loop = word.stem, word.loop
    ns, nl = len(stem), len(loop)
    g = nx.DiGraph()
    start = [(s, 0) for s in aut.initial]
    g.add_nodes_from(start)
    queue = deque(start)
    seen = set(start)

    def nextpos(i):
        return i + 1 if i + 1 < ns + nl else ns

    while queue:
        s, i = queue.popleft()
        letter = stem[i] if i < ns else loop[i - ns]
        for a, t in aut.succ.get(s, ()):
            if a is EPS:
                nxt, sym = (t, i), False
            elif a == letter:
                nxt, sym = (t, nextpos(i)), True
            else:
                continue
            if g.has_edge((s, i), nxt):
                g.edges[(s, i), nxt]["sym"] |= sym
            else:
                g.add_edge((s, i), nxt, sym=sym)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    for comp in nx.strongly_connected_components(g):
        sub = g.subgraph(comp)
        if not any(d["sym"] for _, _, d in sub.edges(data=True)):
            continue
        states = {s for s, _ in comp}
        if all(states & fs for fs in aut.finals):
            return True
    return False


def is_empty_omega(aut: UntimedAutomaton) -> bool:
    """No accepting lasso (epsilon-only cycles do not count)."""
    g = nx.DiGraph()
    g.add_nodes_from(aut.initial)
    for s, a, t in aut.transitions:
        if g.has_edge(s, t):
            g.edges[s, t]["sym"] |= a is not EPS
        else:
            g.add_edge(s, t, sym=a is not EPS)
    reach = set()
    for s in aut.initial:
        reach |= nx.descendants(g, s) | {s}
    g = g.subgraph(reach)
    for comp in nx.strongly_connected_components(g):
        sub = g.subgraph(comp)
        if any(d["sym"] for _, _, d in sub.edges(data=True)) and all(comp & fs for fs in aut.finals):
            return False
    return True


def to_nba(aut: UntimedAutomaton) -> UntimedAutomaton:
    """Epsilon removal then degeneralisation."""
    return degeneralize(remove_epsilon(aut))
