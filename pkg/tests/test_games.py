import itertools
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import positional_winners
from timedsynth.automata import BUCHI, UntimedAutomaton
from timedsynth.games import (
    MealyController,
    ParityGame,
    constant_controller,
    controller_wins,
    decide_00_synthesis,
    minimize_mealy,
    solve_parity,
)


def random_arena(rng: random.Random, n: int, prios: int, parallel: bool = False) -> ParityGame:
    owner = [rng.randint(0, 1) for _ in range(n)]
    priority = [rng.randrange(prios) for _ in range(n)]
    succ = []
    for v in range(n):
        targets = rng.sample(range(n), rng.randint(1, min(3, n)))
        out = [(f"e{i}", w) for i, w in enumerate(targets)]
        if parallel and rng.random() < 0.5:
            out.append((f"e{len(out)}", targets[0]))
        succ.append(out)
    return ParityGame(owner, priority, succ, 0, list(range(n)))


def check_against_oracle(game: ParityGame):
    (w0, w1), (s0, s1) = solve_parity(game)
    targets = [[w for _, w in out] for out in game.succ]
    o0, o1 = positional_winners(game.owner, game.priority, targets)
    assert (w0, w1) == (o0, o1)
    # the returned strategies stay inside the winning regions
    for p, win, strat in ((0, w0, s0), (1, w1, s1)):
        for v in win:
            if game.owner[v] == p:
                action = strat[v]
                w = dict(game.succ[v])[action]
                assert w in win
            else:
                assert all(w in win for _, w in game.succ[v])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 6), st.integers(1, 3))
def test_zielonka_matches_enumeration(seed, n, prios):
    check_against_oracle(random_arena(random.Random(seed), n, prios))


def test_zielonka_parallel_edges():
    # two actions to the same vertex must count once when attracting
    game = ParityGame([1, 0], [1, 0], [[("x", 1), ("y", 1)], [("z", 0)]], 0, [0, 1])
    (w0, w1), _ = solve_parity(game)
    assert w0 == {0, 1} and w1 == set()
    rng = random.Random(42)
    for _ in range(200):
        check_against_oracle(random_arena(rng, rng.randint(1, 6), 3, parallel=True))


def eventually_b_after_a():
    """Player I wins iff some 'a' is answered with 'y'."""
    alphabet = tuple(itertools.product("ab", "xy"))
    trs = [(0, ("a", "y"), 1)] + [(0, l, 0) for l in alphabet if l != ("a", "y")]
    trs += [(1, l, 1) for l in alphabet]
    return UntimedAutomaton(alphabet, (0, 1), {0}, tuple(trs), ({1},), BUCHI)


def copy_game():
    """Player I wins iff Player II ever fails to echo the previous input."""
    alphabet = tuple(itertools.product("ab", "ab"))
    trs = []
    for prev in ("a", "b"):
        for a, b in alphabet:
            trs.append((prev, (a, b), a if b == prev else "bad"))
    trs += [("start", (a, b), a) for a, b in alphabet]
    trs += [("bad", l, "bad") for l in alphabet]
    return UntimedAutomaton(alphabet, ("start", "a", "b", "bad"), {"start"}, tuple(trs),
                            ({"bad"},), BUCHI)


def test_untimed_synthesis_wins():
    w = eventually_b_after_a()
    out = decide_00_synthesis("ab", "xy", w)
    assert out.controller is not None
    assert controller_wins(out.controller, w)
    assert out.controller.run("abba") == ["x"] * 4
    # re-encoding the controller as a one-choice arena restriction keeps the verdict
    assert not controller_wins(constant_controller("ab", "xy", "y"), w)


def test_untimed_synthesis_with_memory():
    w = copy_game()
    out = decide_00_synthesis("ab", "ab", w)
    assert out.controller is not None
    assert controller_wins(out.controller, w)
    assert out.controller.run("abba")[1:] == ["a", "b", "b"]
    assert len(out.controller.memory) >= 2


def test_untimed_synthesis_loses():
    alphabet = tuple(itertools.product("a", "xy"))
    universal = UntimedAutomaton(alphabet, (0,), {0}, tuple((0, l, 0) for l in alphabet),
                                 ({0},), BUCHI)
    assert decide_00_synthesis("a", "xy", universal).controller is None
    empty = UntimedAutomaton(alphabet, (0,), {0}, (), (set(),), BUCHI)
    assert decide_00_synthesis("a", "xy", empty).controller is not None


def test_minimize_mealy():
    delta = {(q, a): ((q + 1) % 4, "x" if a == "a" else "y") for q in range(4) for a in "ab"}
    m = MealyController(("a", "b"), ("x", "y"), (0, 1, 2, 3), 0, delta)
    small = minimize_mealy(m)
    assert len(small.memory) == 1
    rng = random.Random(1)
    for _ in range(20):
        word = [rng.choice("ab") for _ in range(8)]
        assert small.run(word) == m.run(word)
