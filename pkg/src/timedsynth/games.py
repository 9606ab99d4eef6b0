"""Untimed synthesis games: parity arenas, Zielonka's algorithm and
Mealy controller extraction."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Sequence

from .automata import UntimedAutomaton
from .omega import (
    DEFAULT_STATE_CAP,
    ParityAutomaton,
    bisim_quotient,
    determinize,
    is_empty_omega,
    minimize_priorities,
    prune,
    to_nba,
)

PLAYER_I, PLAYER_II = 0, 1


class NoControllerError(RuntimeError):
    pass


@dataclass
class ParityGame:
    """Vertices ``0..n-1``; ``succ[v]`` lists (action, target)."""

    owner: list
    priority: list
    succ: list
    initial: int
    names: list

    def __post_init__(self):
        for v, out in enumerate(self.succ):
            if not out:
                raise ValueError(f"vertex {v} has no successor")

    @property
    def size(self) -> int:
        return len(self.owner)


def build_synthesis_arena(p: ParityAutomaton, inputs: Sequence, outputs: Sequence) -> ParityGame:
    """Player I picks a from P-states, Player II answers b from (q, a)."""
    inputs, outputs = tuple(inputs), tuple(outputs)
    n = p.size
    owner = [PLAYER_I] * n
    priority = list(p.priority)
    names: list = list(range(n))
    succ: list = [[] for _ in range(n)]
    for q in range(n):
        for a in inputs:
            v = len(owner)
            owner.append(PLAYER_II)
            priority.append(p.priority[q])
            names.append((q, a))
            succ[q].append((a, v))
            succ.append([(b, p.step(q, (a, b))) for b in outputs])
    return ParityGame(owner, priority, succ, p.initial, names)


def _attractor(game: ParityGame, region: set, target: set, player: int, pred: list):
    """Attractor of ``target`` for ``player`` inside ``region`` with strategy."""
    attr = set(target)
    strategy = {}
    count = {}
    for v in region:
        if v not in attr and game.owner[v] != player:
            count[v] = len({w for _, w in game.succ[v] if w in region})
    queue = deque(attr)
    while queue:
        w = queue.popleft()
        for v, action in pred[w]:
            if v not in region or v in attr:
                continue
            if game.owner[v] == player:
                attr.add(v)
                strategy[v] = action
                queue.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strategy


def solve_parity(game: ParityGame):
    """Zielonka's algorithm (min-even: Player I wins on even).

    Returns (win, strategy): ``win[p]`` is player p's winning region and
    ``strategy[p]`` maps p's vertices there to a chosen action.
    """
    pred: list = [[] for _ in range(game.size)]
    for v, out in enumerate(game.succ):
        seen = set()
        for action, w in out:
            if w not in seen:
                seen.add(w)
                pred[w].append((v, action))
    return _zielonka(game, set(range(game.size)), pred)


def _any_edge_inside(game, v, region):
    for action, w in game.succ[v]:
        if w in region:
            return action
    raise AssertionError("subgame is not a trap")


def _zielonka(game: ParityGame, region: set, pred: list):
    if not region:
        return (set(), set()), ({}, {})
    p = min(game.priority[v] for v in region)
    i = p % 2
    top = {v for v in region if game.priority[v] == p}
    a, astrat = _attractor(game, region, top, i, pred)
    (w0, w1), (s0, s1) = _zielonka(game, region - a, pred)
    sub_win = (w0, w1)
    sub_strat = (s0, s1)
    if not sub_win[1 - i]:
        strat_i = dict(sub_strat[i])
        strat_i.update(astrat)
        for v in top:
            if game.owner[v] == i:
                strat_i[v] = _any_edge_inside(game, v, region)
        win = [None, None]
        strat = [None, None]
        win[i], win[1 - i] = set(region), set()
        strat[i], strat[1 - i] = strat_i, {}
        return tuple(win), tuple(strat)
    b, bstrat = _attractor(game, region, sub_win[1 - i], 1 - i, pred)
    (v0, v1), (t0, t1) = _zielonka(game, region - b, pred)
    win2 = (v0, v1)
    strat2 = (t0, t1)
    opp = dict(strat2[1 - i])
    opp.update({v: s for v, s in sub_strat[1 - i].items() if v in sub_win[1 - i]})
    opp.update(bstrat)
    win = [None, None]
    strat = [None, None]
    win[1 - i] = win2[1 - i] | b
    win[i] = set(win2[i])
    strat[1 - i] = {v: s for v, s in opp.items() if v in win[1 - i] and game.owner[v] == 1 - i}
    strat[i] = {v: s for v, s in strat2[i].items() if v in win[i]}
    return tuple(win), tuple(strat)


@dataclass
class MealyController:
    """Untimed controller: ``delta[(l, a)] = (l', b)``."""

    inputs: tuple
    outputs: tuple
    memory: tuple
    initial: Hashable
    delta: dict

    def step(self, loc, a):
        return self.delta[(loc, a)]

    def run(self, word: Sequence) -> list:
        loc = self.initial
        out = []
        for a in word:
            loc, b = self.delta[(loc, a)]
            out.append(b)
        return out


def extract_mealy(game: ParityGame, win_ii: set, strategy_ii: dict,
                  inputs: Sequence, outputs: Sequence) -> MealyController:
    if game.initial not in win_ii:
        raise NoControllerError("initial vertex is not winning for Player II")
    inputs = tuple(inputs)
    delta = {}
    memory = []
    queue = deque([game.initial])
    seen = {game.initial}
    while queue:
        q = queue.popleft()
        memory.append(q)
        for a, v in game.succ[q]:
            b = strategy_ii[v]
            target = next(w for act, w in game.succ[v] if act == b)
            delta[(q, a)] = (target, b)
            if target not in seen:
                seen.add(target)
                queue.append(target)
    return MealyController(inputs, tuple(outputs), tuple(memory), game.initial, delta)


def minimize_mealy(m: MealyController) -> MealyController:
    """Merge memory states with identical input/output behaviour."""
    block = {q: 0 for q in m.memory}
    count = 1
    while True:
        sigs: dict = {}
        new = {}
        for q in m.memory:
            sig = (block[q],) + tuple(
                (m.delta[(q, a)][1], block[m.delta[(q, a)][0]]) for a in m.inputs
            )
            new[q] = sigs.setdefault(sig, len(sigs))
        block = new
        if len(sigs) == count:
            break
        count = len(sigs)
    # renumber blocks in breadth-first order from the initial state
    order = {block[m.initial]: 0}
    queue = deque([m.initial])
    rep = {0: m.initial}
    while queue:
        q = queue.popleft()
        for a in m.inputs:
            t = m.delta[(q, a)][0]
            if block[t] not in order:
                order[block[t]] = len(order)
                rep[order[block[t]]] = t
                queue.append(t)
    delta = {}
    for i, q in rep.items():
        for a in m.inputs:
            t, b = m.delta[(q, a)]
            delta[(i, a)] = (order[block[t]], b)
    return MealyController(m.inputs, m.outputs, tuple(range(len(rep))), 0, delta)


def constant_controller(inputs: Sequence, outputs: Sequence, b=None) -> MealyController:
    b = outputs[0] if b is None else b
    return MealyController(tuple(inputs), tuple(outputs), (0,), 0,
                           {(0, a): (0, b) for a in inputs})


def controller_product(m: MealyController, w: UntimedAutomaton) -> UntimedAutomaton:
    """Plays consistent with ``m`` that the epsilon-free automaton ``w`` accepts."""
    init = {(m.initial, s) for s in w.initial}
    seen = set(init)
    queue = deque(init)
    edges = []
    while queue:
        l, s = queue.popleft()
        succ = w.succ.get(s, ())
        for a in m.inputs:
            l2, b = m.delta[(l, a)]
            for label, t in succ:
                if label == (a, b):
                    nxt = (l2, t)
                    edges.append(((l, s), label, nxt))
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
    finals = tuple(frozenset(x for x in seen if x[1] in fs) for fs in w.finals)
    return UntimedAutomaton(w.alphabet, tuple(seen), frozenset(init), tuple(edges), finals, w.mode)


def controller_wins(m: MealyController, w: UntimedAutomaton) -> bool:
    """Every infinite play consistent with ``m`` avoids L(w)."""
    return is_empty_omega(controller_product(m, w))


@dataclass
class SynthesisOutcome:
    controller: MealyController | None
    dpa_states: int
    arena_vertices: int


def decide_00_synthesis(inputs: Sequence, outputs: Sequence, w: UntimedAutomaton,
                        cap: int = DEFAULT_STATE_CAP) -> SynthesisOutcome:
    """Untimed Buechi-Landweber game: Player II must keep the play out of L(w)."""
    inputs, outputs = tuple(inputs), tuple(outputs)
    nba = bisim_quotient(prune(to_nba(w)))
    if not nba.states:
        return SynthesisOutcome(constant_controller(inputs, outputs), 0, 0)
    dpa = minimize_priorities(determinize(nba, cap))
    game = build_synthesis_arena(dpa, inputs, outputs)
    (win_i, win_ii), (_, strat_ii) = solve_parity(game)
    if game.initial not in win_ii:
        return SynthesisOutcome(None, dpa.size, game.size)
    ctrl = minimize_mealy(extract_mealy(game, win_ii, strat_ii, inputs, outputs))
    return SynthesisOutcome(ctrl, dpa.size, game.size)
