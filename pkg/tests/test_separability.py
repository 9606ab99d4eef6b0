import random
from fractions import Fraction

import pytest

from timedsynth.automata import (
    AutomatonError,
    TimedWord,
    accepts_finite,
    complete_dta,
    is_deterministic,
    universal_automaton,
)
from timedsynth.fixtures import example_L, point, points
from timedsynth.separability import (
    ACC,
    REJ,
    build_W0,
    controller_to_separator,
    decide_k_separability,
    decide_km_separability,
    separation_game,
    separator_to_controller,
    verify_separator,
)


def word(*ts):
    return TimedWord(tuple(("a", Fraction(t)) for t in ts))


def test_W0_shape():
    a, b = points()
    w0 = build_W0(a, b)
    assert w0.mode == "buchi"
    assert set(w0.alphabet) == {("a", ACC), ("a", REJ)}
    g = separation_game(a, b)
    assert g.inputs == ("a",) and g.outputs == (ACC, REJ)


def test_alphabet_mismatch():
    with pytest.raises(AutomatonError):
        build_W0(point(1), point(1, "b"))


def test_verify_separator():
    a, b = points()
    ok, report = verify_separator(point(1), a, b)
    assert ok and report.to_document() == {"inclusion": "ok", "disjointness": "ok"}
    ok, report = verify_separator(complete_dta(universal_automaton(("a",))), a, b)
    assert not ok and report.inclusion == "ok"
    assert accepts_finite(b, report.disjointness)
    with pytest.raises(AutomatonError):
        verify_separator(example_L(), a, b)


def test_controller_separator_round_trip():
    s = point(1)
    ctrl = separator_to_controller(s, 2)
    back = controller_to_separator(ctrl, s)
    assert is_deterministic(back)
    rng = random.Random(4)
    for _ in range(100):
        ts = sorted(Fraction(rng.randint(0, 12), 4) for _ in range(rng.randint(0, 3)))
        assert accepts_finite(back, word(*ts)) == accepts_finite(s, word(*ts))


def test_points_separability():
    a, b = points()
    assert not decide_km_separability(a, b, 0, 1).separable
    assert not decide_k_separability(a, b, 0).separable
    res = decide_km_separability(a, b, 1, 2)
    assert res.separable and res.m == 2 and res.report.ok
    assert verify_separator(res.separator, a, b)[0]
    assert accepts_finite(res.separator, word(1))
    assert not accepts_finite(res.separator, word(2))
    res = decide_k_separability(a, b, 1)
    assert res.separable and res.report.ok
