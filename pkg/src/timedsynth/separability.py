"""Deterministic separability of timed languages through timed synthesis."""
from __future__ import annotations

from dataclasses import dataclass, field

from .automata import (
    FINITE,
    AutomatonError,
    TimedAutomaton,
    Transition,
    complement_dta,
    complete_dta,
    eps_in_language,
    inverse_projection,
    is_deterministic,
    nta_emptiness,
    product,
    suffix_omega,
    union,
)
from .constraints import TRUE
from .omega import DEFAULT_STATE_CAP
from .regions import characteristic_constraint, enumerate_regions
from .synthesis import KMController, SynthesisError, solve_k, solve_km
from .transforms import GameSpec

ACC, REJ = "acc", "rej"
VERDICTS = (ACC, REJ)


def _check_pair(a: TimedAutomaton, b: TimedAutomaton):
    if set(a.alphabet) != set(b.alphabet):
        raise AutomatonError("both languages must share one alphabet")
    if a.mode != FINITE or b.mode != FINITE:
        raise AutomatonError("separability is about finite-word languages")


def _ends_with(alphabet, verdict) -> TimedAutomaton:
    """Nonempty words over alphabet x {acc, rej} whose last verdict is ``verdict``."""
    letters = tuple((a, v) for a in alphabet for v in VERDICTS)
    trs = [Transition(q, (a, v), TRUE, frozenset(), "yes" if v == verdict else "no")
           for q in ("start", "yes", "no") for a, v in letters]
    return TimedAutomaton(letters, ("start", "yes", "no"), (), {"start"}, {"yes"}, trs, FINITE)


def build_W0(a: TimedAutomaton, b: TimedAutomaton) -> TimedAutomaton:
    """Player I wins once some prefix is in L(A) but answered rej, or in L(B)
    but answered acc."""
    _check_pair(a, b)
    sigma = tuple(a.alphabet)
    missed = product(inverse_projection(a, VERDICTS), _ends_with(sigma, REJ))
    wrong = product(inverse_projection(b.replace(alphabet=sigma), VERDICTS), _ends_with(sigma, ACC))
    return suffix_omega(union(missed, wrong))


def separation_game(a: TimedAutomaton, b: TimedAutomaton) -> GameSpec:
    return GameSpec(tuple(a.alphabet), VERDICTS, build_W0(a, b))


def controller_to_separator(ctrl: KMController, a: TimedAutomaton) -> TimedAutomaton:
    """DTA over memory x {acc, rej} accepting where the controller said acc."""
    first = ACC if eps_in_language(a) else REJ
    locs = tuple((l, v) for l in ctrl.memory for v in VERDICTS)
    trs = []
    for (l, sym, r), (l2, v, ys) in ctrl.delta.items():
        guard = characteristic_constraint(r)
        for w in VERDICTS:
            trs.append(Transition((l, w), sym, guard, frozenset(ys), (l2, v)))
    final = {(l, ACC) for l in ctrl.memory}
    return TimedAutomaton(tuple(ctrl.inputs), locs, ctrl.clocks, {(ctrl.initial, first)},
                          final, trs, FINITE)


def separator_to_controller(s: TimedAutomaton, m: int | None = None) -> KMController:
    """Controller answering acc exactly when S is in a final location."""
    if not is_deterministic(s):
        raise AutomatonError("separator_to_controller needs a deterministic automaton")
    m = s.max_constant if m is None else max(m, s.max_constant)
    full = complete_dta(s)
    regions = enumerate_regions(len(full.clocks), m, full.clocks)
    delta = {}
    for loc in full.locations:
        for sym in full.alphabet:
            rules = [t for t in full.outgoing.get(loc, ()) if t.label == sym]
            for r in regions:
                (t,) = [t for t in rules if r.satisfies(t.guard)]
                verdict = ACC if t.target in full.final else REJ
                delta[(loc, sym, r)] = (t.target, verdict, frozenset(t.resets))
    (init,) = full.initial
    return KMController(tuple(full.alphabet), VERDICTS, tuple(full.clocks), m,
                        tuple(full.locations), init, delta)


@dataclass
class VerificationReport:
    inclusion: object = "ok"  # or a TimedWord in L(A) \ L(S)
    disjointness: object = "ok"  # or a TimedWord in L(S) & L(B)

    @property
    def ok(self) -> bool:
        return self.inclusion == "ok" and self.disjointness == "ok"

    def to_document(self) -> dict:
        return {"inclusion": str(self.inclusion), "disjointness": str(self.disjointness)}


def verify_separator(s: TimedAutomaton, a: TimedAutomaton, b: TimedAutomaton):
    """(ok, report): L(A) is inside L(S) and L(S) misses L(B)."""
    if not is_deterministic(s):
        raise AutomatonError("the separator must be deterministic")
    report = VerificationReport()
    inc = nta_emptiness(product(a, complement_dta(s)))
    if not inc.empty:
        report.inclusion = inc.word
    dis = nta_emptiness(product(s, b))
    if not dis.empty:
        report.disjointness = dis.word
    return report.ok, report


@dataclass
class SeparatorResult:
    separable: bool
    separator: TimedAutomaton | None = None
    m: int | None = None
    controller: KMController | None = None
    report: VerificationReport | None = None
    stats: dict = field(default_factory=dict)


def _finish(result, a, b) -> SeparatorResult:
    if result is None:
        return SeparatorResult(False)
    s = controller_to_separator(result.controller, a)
    ok, report = verify_separator(s, a, b)
    if not ok:
        raise SynthesisError(f"extracted separator failed verification: {report.to_document()}")
    return SeparatorResult(True, s, result.m, result.controller, report, dict(result.stats))


def decide_km_separability(a: TimedAutomaton, b: TimedAutomaton, k: int, m: int,
                           cap: int = DEFAULT_STATE_CAP) -> SeparatorResult:
    game = separation_game(a, b)
    return _finish(solve_km(game, k, m, cap), a, b)


def decide_k_separability(a: TimedAutomaton, b: TimedAutomaton, k: int,
                          cap: int = DEFAULT_STATE_CAP) -> SeparatorResult:
    game = separation_game(a, b)
    return _finish(solve_k(game, k, cap), a, b)
