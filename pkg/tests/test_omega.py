import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nba_accepts_lasso
from timedsynth.automata import BUCHI, EPS, GBUCHI, UntimedAutomaton
from timedsynth.omega import (
    LassoWord,
    ResourceLimitError,
    accepts_lasso,
    bisim_quotient,
    degeneralize,
    determinize,
    is_empty_omega,
    minimize_priorities,
    prune,
    remove_epsilon,
    to_nba,
)

AB = ("a", "b")


@st.composite
def nbas(draw, max_states=4, eps=False, gen=False):
    n = draw(st.integers(1, max_states))
    labels = AB + ((EPS,) if eps else ())
    edges = draw(st.lists(
        st.tuples(st.integers(0, n - 1), st.sampled_from(labels), st.integers(0, n - 1)),
        max_size=3 * n,
    ))
    init = draw(st.sets(st.integers(0, n - 1), min_size=1))
    nsets = draw(st.integers(1, 2)) if gen else 1
    finals = tuple(draw(st.sets(st.integers(0, n - 1))) for _ in range(nsets))
    return UntimedAutomaton(AB, tuple(range(n)), init, tuple(set(edges)), finals,
                            GBUCHI if gen else BUCHI)


lassos = st.builds(
    LassoWord,
    st.lists(st.sampled_from(AB), max_size=4),
    st.lists(st.sampled_from(AB), min_size=1, max_size=4),
)


def oracle(aut, w):
    return nba_accepts_lasso(aut.initial, aut.transitions, aut.final, w.stem, w.loop)


@settings(max_examples=200, deadline=None)
@given(nbas(), st.lists(lassos, min_size=5, max_size=5))
def test_determinize_preserves_lassos(aut, words):
    dpa = determinize(aut)
    for w in words:
        expected = oracle(aut, w)
        assert accepts_lasso(aut, w) == expected
        assert accepts_lasso(dpa, w) == expected
        assert accepts_lasso(minimize_priorities(dpa), w) == expected
        assert accepts_lasso(dpa.complement(), w) != expected


@settings(max_examples=150, deadline=None)
@given(nbas(eps=True, gen=True), st.lists(lassos, min_size=5, max_size=5))
def test_epsilon_removal_and_degeneralisation(aut, words):
    nba = to_nba(aut)
    assert not nba.has_eps and nba.mode == BUCHI
    plain = remove_epsilon(aut)
    assert not plain.has_eps
    for w in words:
        expected = accepts_lasso(aut, w)
        assert accepts_lasso(plain, w) == expected
        assert accepts_lasso(nba, w) == expected
        assert oracle(nba, w) == expected


@settings(max_examples=150, deadline=None)
@given(nbas(), st.lists(lassos, min_size=5, max_size=5))
def test_reductions_preserve_lassos(aut, words):
    small = bisim_quotient(prune(aut))
    assert len(small.states) <= len(aut.states)
    for w in words:
        assert oracle(small, w) == oracle(aut, w)


@settings(max_examples=150, deadline=None)
@given(nbas())
def test_emptiness_matches_lasso_search(aut):
    # an NBA with n states accepts some lasso with |stem|, |loop| <= n iff nonempty
    n = len(aut.states)
    words = []
    for ls in range(n + 1):
        for ll in range(1, n + 1):
            for bits in range(2 ** (ls + ll)):
                letters = [AB[(bits >> i) & 1] for i in range(ls + ll)]
                words.append(LassoWord(letters[:ls], letters[ls:]))
    assert is_empty_omega(aut) == (not any(oracle(aut, w) for w in words))


def test_degeneralize_two_sets():
    # infinitely many a's and infinitely many b's
    trs = ((0, "a", 1), (0, "b", 0), (1, "a", 1), (1, "b", 0))
    aut = UntimedAutomaton(AB, (0, 1), {0}, trs, ({1}, {0}), GBUCHI)
    nba = degeneralize(aut)
    assert accepts_lasso(nba, LassoWord((), ("a", "b")))
    assert not accepts_lasso(nba, LassoWord(("b",), ("a",)))
    assert not accepts_lasso(nba, LassoWord(("a",), ("b",)))


def test_state_cap():
    rng = random.Random(0)
    n = 8
    trs = {(rng.randrange(n), rng.choice(AB), rng.randrange(n)) for _ in range(40)}
    aut = UntimedAutomaton(AB, tuple(range(n)), {0}, tuple(trs), ({1, 2},), BUCHI)
    with pytest.raises(ResourceLimitError) as info:
        determinize(aut, cap=2)
    assert info.value.cap == 2


def test_lasso_validation():
    with pytest.raises(ValueError):
        LassoWord(("a",), ())
    w = LassoWord(("a",), ("b", "a"))
    assert [w.letter(i) for i in range(5)] == ["a", "b", "a", "b", "a"]
