import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from timedsynth.automata import from_document, to_document
from timedsynth.cli import BAD, CAP, NO, OK, main
from timedsynth.constraints import TRUE
from timedsynth.automata import BUCHI, TimedAutomaton, Transition
from timedsynth.transforms import GameSpec, game_to_document

GOLDEN = Path(__file__).parent / "golden"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return p


def trivial_game(accepting):
    w = TimedAutomaton((("a", "b"),), ("q",), (), {"q"}, {"q"} if accepting else set(),
                       (Transition("q", ("a", "b"), TRUE, frozenset(), "q"),), BUCHI)
    return game_to_document(GameSpec(("a",), ("b",), w))


@pytest.mark.parametrize("name,args", [
    ("example-L", []), ("example-L-complement", []), ("example-Lk-1", ["example-Lk", "1"]),
    ("points", []), ("deadline", []),
])
def test_fixture_golden(name, args, capsys):
    code, out, _ = run(["fixtures"] + (args or [name]), capsys)
    assert code == OK
    assert out == (GOLDEN / f"{name}.json").read_text(encoding="utf-8")


def test_fixture_json_fixpoint():
    for name in ("example-L", "example-L-complement", "example-Lk-1"):
        doc = json.loads((GOLDEN / f"{name}.json").read_text(encoding="utf-8"))
        assert to_document(from_document(doc)) == doc


def test_fixture_errors(capsys):
    assert run(["fixtures", "nope"], capsys)[0] == BAD
    assert run(["fixtures", "example-Lk"], capsys)[0] == BAD
    assert run(["fixtures", "points", "C"], capsys)[0] == BAD
    code, out, _ = run(["fixtures", "points", "A"], capsys)
    assert code == OK and json.loads(out)["locations"] == ["l0", "l1"]


def test_example_L_fixture_structure():
    doc = json.loads((GOLDEN / "example-L.json").read_text(encoding="utf-8"))
    assert len(doc["transitions"]) == 4 and doc["clocks"] == ["x"]


def test_member(capsys):
    L = GOLDEN / "example-L.json"
    assert run(["member", L, "(a,0)(a,2/5)(a,1)"], capsys)[:2] == (OK, "accept\n")
    assert run(["member", L, "(a,0)(a,1)"], capsys)[0] == OK
    assert run(["member", L, "(a,0)(a,1/2)"], capsys)[:2] == (NO, "reject\n")
    assert run(["member", L, ""], capsys)[0] == NO
    code, _, err = run(["member", L, "(a,1)(a,0)"], capsys)
    assert code == BAD and "position 1" in err
    assert run(["member", L, "(a,1"], capsys)[0] == BAD
    assert run(["member", L, "(b,1)"], capsys)[0] == BAD
    assert run(["member", GOLDEN / "missing.json", "(a,1)"], capsys)[0] == BAD


def test_separate(tmp_path, capsys):
    both = json.loads((GOLDEN / "points.json").read_text(encoding="utf-8"))
    a = write(tmp_path, "a.json", both["A"])
    b = write(tmp_path, "b.json", both["B"])
    out = tmp_path / "sep.json"
    assert run(["separate", a, b, "-k", 1, "-m", 2, "-o", out], capsys)[0] == OK
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["m"] == 2 and doc["verification"] == {"inclusion": "ok", "disjointness": "ok"}
    assert run(["member", write(tmp_path, "s.json", doc["separator"]), "(a,1)"], capsys)[0] == OK
    assert run(["separate", a, b, "-k", 0], capsys)[:2] == (NO, "not-separable\n")
    assert run(["separate", a, tmp_path / "none.json", "-k", 1], capsys)[0] == BAD
    code, _, err = run(["separate", a, b, "-k", 1, "-m", 2, "--cap", 2], capsys)
    assert code == CAP and "untimed game" in err


def test_synth(tmp_path, capsys):
    empty = write(tmp_path, "empty.json", trivial_game(False))
    universal = write(tmp_path, "universal.json", trivial_game(True))
    deadline = GOLDEN / "deadline.json"
    assert run(["synth", empty, "-k", 1, "-m", 1], capsys)[0] == OK
    assert run(["synth", universal, "-k", 1, "-m", 1], capsys)[:2] == (NO, "no-controller\n")
    out = tmp_path / "ctrl.json"
    assert run(["synth", deadline, "-k", 1, "-m", 1, "-o", out], capsys)[0] == OK
    assert run(["synth", deadline, "-k", 0, "-m", 1], capsys)[0] == NO
    code, text, _ = run(["synth", deadline, "-k", 1], capsys)
    assert code == OK and json.loads(text)["m"] > 1
    assert run(["synth", deadline, "-k", -1], capsys)[0] == BAD
    assert run(["synth", deadline, "-k", 1, "-m", 0], capsys)[0] == BAD
    bad = write(tmp_path, "bad.json", {"playerI": ["a"]})
    assert run(["synth", bad, "-k", 1], capsys)[0] == BAD

    code, text, _ = run(["simulate", out, "(a,0)(a,1/2)(a,1)(a,3)"], capsys)
    assert code == OK
    assert [line.split(" -> ")[1].split()[0] for line in text.splitlines()[1:]] == [
        "b_bad", "b_bad", "b_ok", "b_ok"]
    assert run(["simulate", out, "(a,1)(a,0)"], capsys)[0] == BAD
    assert run(["simulate", out, "(c,1)"], capsys)[0] == BAD
    first = run(["simulate", out, "--seed", 5], capsys)[1]
    assert run(["simulate", out, "--seed", 5], capsys)[1] == first


def test_dot(tmp_path, capsys):
    code, out, _ = run(["dot", GOLDEN / "example-L.json"], capsys)
    assert code == OK
    assert out == (GOLDEN / "example-L.dot").read_text(encoding="utf-8")
    assert out.count("shape=") == 3 and out.count("->") == 4
    assert run(["dot", GOLDEN / "example-L.json"], capsys)[1] == out
    empty = write(tmp_path, "e.json", {"alphabet": ["a"], "locations": [], "initial": [],
                                       "final": [], "transitions": []})
    code, out, _ = run(["dot", empty], capsys)
    assert code == OK and "shape=" not in out and "->" not in out
    assert "digraph" in run(["dot", GOLDEN / "deadline.json"], capsys)[1]
    assert run(["dot", write(tmp_path, "x.json", {"what": 1})], capsys)[0] == BAD


def test_dot_of_controller(tmp_path, capsys):
    out = tmp_path / "ctrl.json"
    run(["synth", GOLDEN / "deadline.json", "-k", 1, "-m", 1, "-o", out], capsys)
    code, text, _ = run(["dot", out], capsys)
    assert code == OK and "/ b_ok" in text and "style=bold" in text


def test_usage_errors(capsys):
    assert main([]) == BAD
    assert main(["member"]) == BAD
    assert main(["--help"]) == OK


@pytest.mark.skipif(shutil.which("timedsynth") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["timedsynth", "member", str(GOLDEN / "example-L.json"), "(a,0)(a,1)"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "accept\n"
    res = subprocess.run([sys.executable, "-m", "timedsynth.cli", "fixtures", "bogus"],
                         capture_output=True, text=True)
    assert res.returncode == 2
