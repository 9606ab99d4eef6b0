import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import in_example_L, random_monotone_times
from timedsynth.automata import (
    EPS,
    AutomatonError,
    TimedAutomaton,
    TimedWord,
    Transition,
    WordError,
    accepts_finite,
    complement_dta,
    complete_dta,
    dumps,
    empty_automaton,
    eps_in_language,
    from_document,
    inverse_projection,
    is_deterministic,
    loads,
    nta_emptiness,
    parse_word,
    product,
    regionise,
    reset_inactive_clocks,
    to_document,
    union,
    universal_automaton,
)
from timedsynth.constraints import TRUE, parse_constraint
from timedsynth.fixtures import example_L, example_L_complement, example_Lk, point, points

times = st.lists(
    st.fractions(min_value=0, max_value=2, max_denominator=4), min_size=0, max_size=5
).map(lambda ds: [sum(ds[: i + 1], Fraction(0)) for i in range(len(ds))])


def word(ts, sym="a"):
    return TimedWord(tuple((sym, t) for t in ts))


@settings(max_examples=150, deadline=None)
@given(times)
def test_example_L_oracle(ts):
    assert accepts_finite(example_L(), word(ts)) == in_example_L(ts)


@settings(max_examples=150, deadline=None)
@given(times)
def test_membership_methods_agree(ts):
    w = word(ts)
    for aut in (example_L(), example_L_complement()):
        assert accepts_finite(aut, w, "direct") == accepts_finite(aut, w, "product")


def in_Lk(ts, k):
    n = len(ts)
    strict = all(a < b for a, b in zip(ts, ts[1:]))
    return strict and n > 2 ** k and ts[-1] - ts[-1 - 2 ** k] == 1


def lk_positive(rng, k):
    """A strict word whose last letter is exactly 1 after the one 2^k back."""
    head = sorted({Fraction(rng.randint(0, 8), 4) for _ in range(rng.randint(0, 2))})
    s = (head[-1] if head else Fraction(0)) + Fraction(rng.randint(1, 4), 4)
    inner = sorted({Fraction(rng.randint(1, 15), 16) for _ in range(2 ** k - 1)})
    if len(inner) != 2 ** k - 1:
        return None
    return head + [s] + [s + d for d in inner] + [s + 1]


@pytest.mark.parametrize("k", [1, 2])
def test_example_Lk_oracle(k):
    rng = random.Random(k)
    aut = example_Lk(k)
    hits = 0
    for _ in range(150):
        ts = lk_positive(rng, k) if rng.random() < 0.5 else None
        if ts is None:
            ts = random_monotone_times(rng, rng.randint(0, 2 ** k + 3), 4, 1)
        elif rng.random() < 0.3:
            ts[-1] += Fraction(1, 8)
        expected = in_Lk(ts, k)
        hits += expected
        assert accepts_finite(aut, word(ts)) == expected, ts
    assert hits > 10


def test_example_Lk_clock_count():
    assert len(example_Lk(1).clocks) == 4
    assert len(example_Lk(3).clocks) == 8
    with pytest.raises(ValueError):
        example_Lk(-1)


def test_point_languages():
    a, b = points()
    assert accepts_finite(a, parse_word("(a,1)"))
    assert not accepts_finite(a, parse_word("(a,2)"))
    assert accepts_finite(b, parse_word("(a,2)"))
    assert not accepts_finite(a, parse_word("(a,1)(a,1)"))


def test_determinism_and_complement():
    assert not is_deterministic(example_L())
    assert is_deterministic(point(1))
    co = complement_dta(point(1))
    assert is_deterministic(co)
    for text in ["", "(a,1)", "(a,0)", "(a,1)(a,1)", "(a,3/2)"]:
        w = parse_word(text)
        assert accepts_finite(co, w) != accepts_finite(point(1), w)
    with pytest.raises(AutomatonError):
        complement_dta(example_L())


def test_complete_and_regionise_preserve_language():
    rng = random.Random(5)
    p = point(1)
    full = complete_dta(p)
    reg = regionise(p)
    for _ in range(50):
        ts = random_monotone_times(rng, rng.randint(0, 3), 4)
        assert accepts_finite(full, word(ts)) == accepts_finite(p, word(ts))
        assert accepts_finite(reg, word(ts)) == accepts_finite(p, word(ts))


def test_boolean_operations():
    rng = random.Random(7)
    l, c = example_L(), point(1)
    both = product(l, c)
    either = union(l, c)
    apart = union(l, c, share_clocks=False)
    for _ in range(200):
        ts = random_monotone_times(rng, rng.randint(0, 4), 4)
        w = word(ts)
        x, y = accepts_finite(l, w), accepts_finite(c, w)
        assert accepts_finite(both, w) == (x and y)
        assert accepts_finite(either, w) == (x or y)
        assert accepts_finite(apart, w) == (x or y)


def test_product_rejects_mixed_alphabets():
    other = point(1, "b")
    with pytest.raises(AutomatonError):
        product(point(1), other)


def test_emptiness_witness():
    res = nta_emptiness(example_L())
    assert not res.empty
    assert accepts_finite(example_L(), res.word)
    assert nta_emptiness(product(example_L(), example_L_complement())).empty
    assert nta_emptiness(empty_automaton(("a",))).empty
    assert not nta_emptiness(universal_automaton(("a",))).empty


def test_epsilon_transitions():
    trs = [Transition("s", EPS, parse_constraint("x = 0"), frozenset(), "t"),
           Transition("t", "a", parse_constraint("x = 1"), frozenset(), "u")]
    aut = TimedAutomaton(("a",), ("s", "t", "u"), ("x",), {"s"}, {"u"}, trs)
    assert accepts_finite(aut, parse_word("(a,1)"))
    assert not accepts_finite(aut, parse_word("(a,2)"))
    aut2 = aut.replace(final=frozenset({"t"}))
    assert eps_in_language(aut2)
    assert not eps_in_language(aut)


def test_inverse_projection():
    inv = inverse_projection(point(1), ("acc", "rej"))
    assert set(inv.alphabet) == {("a", "acc"), ("a", "rej")}
    assert accepts_finite(inv, TimedWord(((("a", "rej"), 1),)))
    assert not accepts_finite(inv, TimedWord(((("a", "acc"), 2),)))


def test_reset_inactive_clocks_keeps_language():
    rng = random.Random(11)
    aut = example_L_complement()
    red = reset_inactive_clocks(aut)
    for _ in range(100):
        ts = random_monotone_times(rng, rng.randint(0, 5), 4)
        assert accepts_finite(red, word(ts)) == accepts_finite(aut, word(ts))


def test_json_round_trip():
    for aut in (example_L(), example_L_complement(), example_Lk(1)):
        again = loads(dumps(aut))
        assert to_document(again) == to_document(aut)
    doc = to_document(example_L())
    assert doc["locations"] == ["p", "q", "r"]
    with pytest.raises(AutomatonError):
        from_document({"alphabet": ["a"]})
    bad = dict(doc, transitions=[dict(doc["transitions"][0], guard="x <")])
    with pytest.raises(AutomatonError):
        from_document(bad)


def test_word_parsing():
    w = parse_word("(a,0)(b, 2/5)(a,1.5)")
    assert [t for _, t in w] == [0, Fraction(2, 5), Fraction(3, 2)]
    with pytest.raises(WordError) as info:
        parse_word("(a,1)(a,0)")
    assert info.value.position == 1
    with pytest.raises(WordError):
        parse_word("(a,1")
    with pytest.raises(WordError):
        accepts_finite(example_L(), parse_word("(b,1)"))


def test_structural_validation():
    with pytest.raises(AutomatonError):
        TimedAutomaton(("a",), ("p",), (), {"q"}, set(), ())
    with pytest.raises(AutomatonError):
        TimedAutomaton(("a",), ("p",), (), {"p"}, set(),
                       (Transition("p", "a", parse_constraint("x < 1"), frozenset(), "p"),))
    with pytest.raises(AutomatonError):
        TimedAutomaton(("a",), ("p",), (), {"p"}, set(),
                       (Transition("p", "b", TRUE, frozenset(), "p"),))
