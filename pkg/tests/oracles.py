"""Independent reference implementations used by the tests.

Nothing here calls into the package's region, automaton or game algorithms;
only plain data classes and constraint evaluation are shared.
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction


def sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_pattern(values, m: int) -> tuple:
    """Signs of x - c (0 <= c <= m) and x - y - c (-m <= c <= m)."""
    single = tuple(sign(v - c) for v in values for c in range(m + 1))
    pairs = tuple(
        sign(values[i] - values[j] - c)
        for i in range(len(values))
        for j in range(i + 1, len(values))
        for c in range(-m, m + 1)
    )
    return single + pairs


def grid_patterns(k: int, m: int, den: int = 6) -> set:
    top = den * (2 * m + 2)
    points = [Fraction(i, den) for i in range(top + 1)]
    return {sign_pattern(vs, m) for vs in itertools.product(points, repeat=k)}


def successor_pattern(values, m: int) -> tuple:
    """Pattern of the first region reached by letting time pass."""
    p0 = sign_pattern(values, m)
    crit = sorted({c - v for v in values for c in range(m + 1) if c > v})
    cands = []
    prev = Fraction(0)
    for d in crit:
        cands += [(prev + d) / 2, d]
        prev = d
    cands.append(prev + 1)
    for d in cands:
        p = sign_pattern([v + d for v in values], m)
        if p != p0:
            return p
    return p0


def random_fraction(rng: random.Random, top: int, max_den: int) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, top * den), den)


# -- languages ---------------------------------------------------------------------


def in_example_L(ts) -> bool:
    """t_n - t_i = 1 for some i < n, read by the three-location automaton.

    After its x = 1 step that automaton is stuck, so every letter strictly
    between position i and n must come before t_n.
    """
    n = len(ts)
    for i in range(n - 1):
        if ts[-1] - ts[i] == 1 and (i == n - 2 or ts[-2] < ts[-1]):
            return True
    return False


def random_monotone_times(rng: random.Random, length: int, max_den: int, step_top: int = 2):
    t = Fraction(0)
    out = []
    for _ in range(length):
        if rng.random() < 0.2:
            d = Fraction(0)
        elif rng.random() < 0.3:
            d = Fraction(rng.randint(1, step_top))
        else:
            den = rng.randint(1, max_den)
            d = Fraction(rng.randint(1, step_top * den), den)
        t += d
        out.append(t)
    # plant exact unit gaps now and then
    if len(out) >= 2 and rng.random() < 0.5:
        i = rng.randrange(len(out) - 1)
        shift = out[i] + 1 - out[-1]
        if shift >= 0:
            out[-1] += shift
    return out


# -- timed automata ------------------------------------------------------------------


def run_dta(aut, timed_letters):
    """Final location of the unique run of a deterministic TA, None if stuck."""
    (loc,) = aut.initial
    val = {c: Fraction(0) for c in aut.clocks}
    last = Fraction(0)
    for letter, t in timed_letters:
        t = Fraction(t)
        val = {c: v + t - last for c, v in val.items()}
        last = t
        enabled = [tr for tr in aut.outgoing.get(loc, ())
                   if tr.label == letter and tr.guard.evaluate(val)]
        assert len(enabled) <= 1, "not deterministic"
        if not enabled:
            return None
        tr = enabled[0]
        val = {c: (Fraction(0) if c in tr.resets else v) for c, v in val.items()}
        loc = tr.target
    return loc


# -- parity games ----------------------------------------------------------------------


def positional_winners(owner, priority, succ):
    """Winning regions by enumerating all positional strategy pairs (min-even)."""
    n = len(owner)
    mine = [[v for v in range(n) if owner[v] == p] for p in (0, 1)]
    choices = [[list(range(len(succ[v]))) for v in mine[p]] for p in (0, 1)]

    def outcome(s0, s1):
        pick = {}
        for v, c in zip(mine[0], s0):
            pick[v] = succ[v][c]
        for v, c in zip(mine[1], s1):
            pick[v] = succ[v][c]
        res = []
        for v in range(n):
            seen = {}
            path = []
            while v not in seen:
                seen[v] = len(path)
                path.append(v)
                v = pick[v]
            res.append(min(priority[u] for u in path[seen[v]:]) % 2 == 0)
        return res

    strat0 = list(itertools.product(*choices[0]))
    strat1 = list(itertools.product(*choices[1]))
    table = [[outcome(s0, s1) for s1 in strat1] for s0 in strat0]
    win0 = {v for v in range(n) if any(all(row[j][v] for j in range(len(strat1))) for row in table)}
    win1 = {v for v in range(n) if any(all(not table[i][j][v] for i in range(len(strat0)))
                                       for j in range(len(strat1)))}
    return win0, win1


# -- enriched plays ---------------------------------------------------------------------


def last_request(play, i, x):
    """Index of the latest x-request strictly before position i, or None."""
    for j in range(i - 1, -1, -1):
        if x in play[j][0][1][1]:
            return j
    return None


def nu(play, i, x):
    """Time since the latest x-request before position i (time since 0 if none)."""
    j = last_request(play, i, x)
    t = play[i][1]
    return t - (play[j][1] if j is not None else 0)


def frac(v):
    return v - math.floor(v)


# -- Buechi lassos ------------------------------------------------------------------------


def nba_accepts_lasso(states_init, edges, finals, stem, loop) -> bool:
    """Plain search: some reachable (final, position) node lies on a cycle.

    ``edges`` is a list of (source, label, target) without epsilon moves.
    """
    n = len(stem) + len(loop)

    def letter(i):
        return stem[i] if i < len(stem) else loop[i - len(stem)]

    def nxt(i):
        return i + 1 if i + 1 < n else len(stem)

    out = {}
    for s, a, t in edges:
        out.setdefault(s, []).append((a, t))

    def succ(node):
        s, i = node
        return [(t, nxt(i)) for a, t in out.get(s, ()) if a == letter(i)]

    def reach(starts):
        seen = set(starts)
        stack = list(starts)
        while stack:
            v = stack.pop()
            for w in succ(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    reachable = reach([(s, 0) for s in states_init])
    for node in reachable:
        if node[0] in finals and node in reach(succ(node)):
            return True
    return False
