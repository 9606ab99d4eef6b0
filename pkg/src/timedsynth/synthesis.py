"""k,m- and k-timed synthesis through the untimed enriched game.

Pipeline: zero-starting and strict-monotonicity transforms, the enriched
condition W' (or W'' when m is not fixed), untiming, the untimed
Buechi-Landweber game, lifting the untimed winner to a timed controller and
mapping it back through both transforms.  Every returned controller is then
model checked exactly against the original condition.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .automata import (
    BUCHI,
    AutomatonError,
    EmptinessResult,
    TimedAutomaton,
    Transition,
    nta_emptiness,
    product,
    region_automaton,
    reset_inactive_clocks,
    union,
    _sym_to_str,
)
from .constraints import parse_constraint
from .games import MealyController, SynthesisOutcome, decide_00_synthesis
from .monitors import (
    TICK,
    build_not_WII,
    build_not_WII_k,
    build_WI,
    enrich_condition,
    enriched_inputs,
    enriched_outputs,
    hat,
)
from .omega import DEFAULT_STATE_CAP, ResourceLimitError
from .regions import (
    FractionalRegion,
    Region,
    characteristic_constraint,
    default_clocks,
    enumerate_regions,
    frac_region_of,
    region_of,
    region_reset,
    successor_chain,
    xsuccessor,
    zero_region,
)
from .transforms import (
    GameSpec,
    start_symbol,
    strict_monotonic_transform,
    zero_starting_transform,
)


class SynthesisError(RuntimeError):
    """An internal invariant of the pipeline failed."""


class PreconditionError(ValueError):
    pass


# -- timed controllers -------------------------------------------------------------


@dataclass
class KMController:
    """Regionised Mealy controller: ``delta[(l, a, region)] = (l', b, Y)``.

    ``m`` is the declared maximal constant.  The rule table may be kept at a
    coarser ``resolution`` (at most m); a region for constant m is then first
    mapped to the region containing it, which is the same controller.
    """

    inputs: tuple
    outputs: tuple
    clocks: tuple
    m: int
    memory: tuple
    initial: Hashable
    delta: dict
    resolution: int | None = None

    @property
    def k(self) -> int:
        return len(self.clocks)

    @property
    def table_m(self) -> int:
        return self.m if self.resolution is None else self.resolution

    def step(self, loc, a, region: Region):
        if region.m != self.table_m:
            region = region_of(region.valuation, self.table_m, self.clocks)
        return self.delta[(loc, a, region)]

    def regions(self) -> list[Region]:
        """Regions of the rule table."""
        return enumerate_regions(self.k, self.table_m, self.clocks)

    def declare(self, m: int) -> "KMController":
        if m < self.table_m:
            raise ValueError("cannot declare a constant below the table resolution")
        return KMController(self.inputs, self.outputs, self.clocks, m, self.memory,
                            self.initial, self.delta, self.table_m)

    def to_document(self) -> dict:
        index = {l: i for i, l in enumerate(self.memory)}
        rules = []
        for (l, a, r), (l2, b, ys) in sorted(
            self.delta.items(), key=lambda kv: (index[kv[0][0]], repr(kv[0][1]), kv[0][2].key)
        ):
            rules.append({
                "source": index[l],
                "input": _sym_to_str(a),
                "guard": str(characteristic_constraint(r)),
                "output": _sym_to_str(b),
                "resets": sorted(ys),
                "target": index[l2],
            })
        return {
            "inputs": [_sym_to_str(a) for a in self.inputs],
            "outputs": [_sym_to_str(b) for b in self.outputs],
            "clocks": list(self.clocks),
            "m": self.m,
            "resolution": self.table_m,
            "memory": len(self.memory),
            "initial": index[self.initial],
            "rules": rules,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=2, ensure_ascii=False)


def controller_from_document(doc: dict) -> KMController:
    from .automata import _sym_from_str

    clocks = tuple(doc["clocks"])
    m = int(doc["m"])
    res = int(doc.get("resolution", m))
    regions = enumerate_regions(len(clocks), res, clocks)
    by_guard = {str(characteristic_constraint(r)): r for r in regions}
    delta = {}
    for rule in doc["rules"]:
        guard = rule["guard"]
        r = by_guard.get(guard)
        if r is None:
            g = parse_constraint(guard)
            matches = [x for x in regions if x.satisfies(g)]
            if len(matches) != 1:
                raise AutomatonError(f"rule guard {guard!r} is not a region")
            r = matches[0]
        delta[(rule["source"], _sym_from_str(rule["input"]), r)] = (
            rule["target"], _sym_from_str(rule["output"]), frozenset(rule["resets"]))
    return KMController(
        tuple(_sym_from_str(a) for a in doc["inputs"]),
        tuple(_sym_from_str(b) for b in doc["outputs"]),
        clocks, m, tuple(range(int(doc["memory"]))), int(doc["initial"]), delta,
        None if res == m else res,
    )


def materialize(inputs, outputs, clocks, m, initial, step: Callable) -> KMController:
    """Tabulate ``step(mem, a, region) -> (mem', b, Y)`` on reachable memory."""
    regions = enumerate_regions(len(clocks), m, clocks)
    seen = {initial: 0}
    order = [initial]
    queue = deque([initial])
    delta = {}
    while queue:
        mem = queue.popleft()
        for a in inputs:
            for r in regions:
                nxt, b, ys = step(mem, a, r)
                if nxt not in seen:
                    seen[nxt] = len(order)
                    order.append(nxt)
                    queue.append(nxt)
                delta[(seen[mem], a, r)] = (seen[nxt], b, frozenset(ys))
    return KMController(tuple(inputs), tuple(outputs), tuple(clocks), m,
                        tuple(range(len(order))), 0, delta)


@dataclass
class ConformRun:
    initial: tuple  # (memory, valuation)
    steps: list = field(default_factory=list)  # (a, b, t, memory, valuation)

    @property
    def play(self) -> list:
        return [(a, b, t) for a, b, t, _, _ in self.steps]

    @property
    def outputs(self) -> list:
        return [b for _, b, _, _, _ in self.steps]


def simulate_controller(ctrl: KMController, moves: Sequence) -> ConformRun:
    """The conform run against Player I moves [(a, t)] (weakly increasing t)."""
    mem = ctrl.initial
    val = {c: Fraction(0) for c in ctrl.clocks}
    run = ConformRun((mem, dict(val)))
    last = Fraction(0)
    for i, (a, t) in enumerate(moves):
        t = Fraction(t)
        if t < last:
            raise ValueError(f"timestamps decrease at move {i}")
        if a not in ctrl.inputs:
            raise ValueError(f"unknown input {a!r} at move {i}")
        delay = t - last
        val = {c: v + delay for c, v in val.items()}
        r = region_of(val, ctrl.table_m, ctrl.clocks)
        mem, b, ys = ctrl.step(mem, a, r)
        val = {c: (Fraction(0) if c in ys else v) for c, v in val.items()}
        run.steps.append((a, b, t, mem, dict(val)))
        last = t
    return run


def controller_automaton(ctrl: KMController, prefix: str = "_c_") -> TimedAutomaton:
    """The controller as a deterministic Buechi TA over inputs x outputs
    (every location final), with clocks renamed apart."""
    rename = {c: prefix + c for c in ctrl.clocks}
    alphabet = tuple((a, b) for a in ctrl.inputs for b in ctrl.outputs)
    trs = []
    for (l, a, r), (l2, b, ys) in ctrl.delta.items():
        guard = characteristic_constraint(r).rename(rename)
        trs.append(Transition(l, (a, b), guard, frozenset(rename[y] for y in ys), l2))
    return TimedAutomaton(alphabet, ctrl.memory, tuple(rename.values()), {ctrl.initial},
                          set(ctrl.memory), trs, BUCHI)


def check_controller(g: GameSpec, ctrl: KMController) -> EmptinessResult:
    """Exact check that no controller-conform play belongs to W.

    The result is empty iff the controller is winning; otherwise it carries
    the labels of a lasso play in W.
    """
    ta = controller_automaton(ctrl)
    both = reset_inactive_clocks(product(ta, g.condition))
    m = max(ctrl.table_m, g.condition.max_constant)
    return nta_emptiness(both, m)


# -- the enriched conditions ---------------------------------------------------


def _prepare(g: GameSpec) -> GameSpec:
    gz = g if g.zero_starting else zero_starting_transform(g)
    if gz.strictly_monotonic:
        return gz
    # strictness is already one of Player I's obligations in W^I
    return strict_monotonic_transform(gz, strictness=False)


def _check_prepared(g: GameSpec):
    if not (g.zero_starting and g.strictly_monotonic):
        raise PreconditionError("the game must be zero-starting and strictly monotonic")


def build_Wprime(g: GameSpec, k: int, m: int, clocks: Sequence[str] | None = None) -> TimedAutomaton:
    """W^I intersected with (phi^-1(W) union not W^II_{k,m})."""
    _check_prepared(g)
    clocks = default_clocks(k) if clocks is None else tuple(clocks)
    wi = build_WI(g.inputs, g.outputs, clocks)
    w = enrich_condition(g.condition, g.inputs, g.outputs, clocks)
    bad = build_not_WII(g.inputs, g.outputs, clocks, m)
    return product(wi, union(w, bad, share_clocks=False), shared_clocks=[hat(x) for x in clocks])


def build_Wdoubleprime(g: GameSpec, k: int, clocks: Sequence[str] | None = None) -> TimedAutomaton:
    """W^I intersected with (phi^-1(W) union not W^II_k)."""
    _check_prepared(g)
    clocks = default_clocks(k) if clocks is None else tuple(clocks)
    wi = build_WI(g.inputs, g.outputs, clocks)
    w = enrich_condition(g.condition, g.inputs, g.outputs, clocks)
    bad = build_not_WII_k(g.inputs, g.outputs, clocks)
    return product(wi, union(w, bad, share_clocks=False), shared_clocks=[hat(x) for x in clocks])


def _untimed_game(w: TimedAutomaton, inputs, outputs, cap: int, stage: str) -> SynthesisOutcome:
    ra = region_automaton(reset_inactive_clocks(w))
    try:
        return decide_00_synthesis(inputs, outputs, ra, cap)
    except ResourceLimitError as exc:
        raise ResourceLimitError(exc.what, exc.cap, stage) from None


# -- complete controllers and lifting ---------------------------------------------


@dataclass
class CompleteController(MealyController):
    """An untimed enriched controller whose memory also records the region of
    the request clocks and the fractional region of the tracked clocks."""

    base: MealyController | None = None
    clocks: tuple = ()
    m: int = 1


def complete_controller(base: MealyController, k: int, m: int,
                        clocks: Sequence[str] | None = None) -> CompleteController:
    """Memory (l, r, f): r is the region of the request-clock valuation and f
    the fractional region of the tracked clocks after each step."""
    clocks = default_clocks(k) if clocks is None else tuple(clocks)
    init = (base.initial, zero_region(clocks, m), FractionalRegion())
    seen = {init}
    order = [init]
    queue = deque([init])
    delta = {}
    while queue:
        mem = queue.popleft()
        l, r, f = mem
        for a in base.inputs:
            l2, b = base.step(l, a)
            nxt = (l2,) + _complete_update(r, f, a, b)
            delta[(mem, a)] = (nxt, b)
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return CompleteController(base.inputs, base.outputs, tuple(order), init, delta,
                              base=base, clocks=clocks, m=m)


def _complete_update(r: Region, f: FractionalRegion, a, b):
    (_, fa), (_, ys) = a, b
    later = xsuccessor(r, fa)
    if later is None:
        later = r
    r2 = region_reset(later, frozenset(ys))
    kept = fa.restrict(fa.dom - fa.one)
    return r2, kept.reset(ys)


def _frac_of(r: Region, tracked: frozenset) -> FractionalRegion:
    if not tracked:
        return FractionalRegion()
    return frac_region_of({x: v for x, v in r.valuation.items() if x in tracked})


@dataclass
class LiftStats:
    internal_steps: int = 0
    max_depth: int = 0


def lift_controller(ctrl: CompleteController, k: int, m: int, inputs: Sequence,
                    outputs: Sequence, stats: LiftStats | None = None) -> KMController:
    """Timed k,m-controller for the underlying game.

    Memory (l, r, T): l the untimed memory, r the region of the controller's
    own clocks after the last step, T the tracked clocks.  On a letter read in
    region r', the untimed controller first answers a tick for every expiry
    strictly between r and r', then the proper letter with the fractional
    region of r' restricted to T.  If r' does not follow r the move cannot
    happen in a play, and a fixed rule is used.
    """
    if not isinstance(ctrl, CompleteController) or ctrl.base is None:
        raise PreconditionError("lift_controller needs a complete controller")
    base = ctrl.base
    clocks = ctrl.clocks
    if len(clocks) != k:
        raise PreconditionError("clock count does not match k")
    outputs = tuple(outputs)
    fixed_b = min(outputs, key=repr)
    limit = len(enumerate_regions(k, m, clocks))
    stats = stats if stats is not None else LiftStats()

    def step(mem, a, rhat):
        l, r, tracked = mem
        chain = successor_chain(r)
        if rhat not in chain:
            return mem, fixed_b, frozenset()
        idx = chain.index(rhat)
        depth = 0
        for mid in chain[1:idx]:
            expired = frozenset(x for x in tracked if mid.frac_zero(x))
            if not expired:
                continue
            f = _frac_of(mid, tracked)
            l, (b, ys) = base.step(l, (TICK, f))
            depth += 1
            if b != TICK or not ys <= expired:
                raise SynthesisError("untimed controller broke the tick protocol")
            tracked = (tracked - expired) | ys
        if depth > limit:
            raise SynthesisError("lift recursion exceeded the region count")
        stats.internal_steps += depth
        stats.max_depth = max(stats.max_depth, depth)
        f = _frac_of(rhat, tracked)
        l, (b, ys) = base.step(l, (a, f))
        if b == TICK:
            raise SynthesisError("untimed controller answered a proper move with a tick")
        tracked = (tracked - f.one) | ys
        return (l, region_reset(rhat, frozenset(ys)), tracked), b, frozenset(ys)

    init = (base.initial, zero_region(clocks, m), frozenset())
    return materialize(tuple(inputs), outputs, clocks, m, init, step)


# -- mapping controllers back through the transforms ------------------------------


def _perturbed_region(phi: Region, ages: dict, flag: int) -> Region:
    """Region of phi's members shifted by the infinitesimal offsets that the
    simulated strictly monotonic play has accumulated."""
    cur = [r for cls, r in ages.values() if cls == 1]
    n1 = max(cur, default=0)
    d = 0 if flag else n1 + 1
    offsets = {}
    for x, (cls, rank) in ages.items():
        if cls == 0:
            c = 0
        elif cls == 1:
            c = rank
        else:
            c = n1 + 1 + rank
        offsets[x] = d - c
    span = max((abs(o) for o in offsets.values()), default=0) + 2
    unit = Fraction(1, 2 * (len(phi.clocks) + 1) * span)
    val = {x: v + offsets[x] * unit for x, v in phi.valuation.items()}
    return region_of(val, phi.m, phi.clocks)


def _normalise_ages(ages: dict) -> tuple:
    out = dict(ages)
    for cls in (1, 2):
        ranks = sorted({r for c, r in ages.values() if c == cls})
        dense = {r: i + 1 for i, r in enumerate(ranks)}
        for x, (c, r) in ages.items():
            if c == cls:
                out[x] = (c, dense[r])
    return tuple(sorted(out.items()))


def strict_backmap(ctrl: KMController, inputs: Sequence) -> KMController:
    """Controller for the game before the strict-monotonicity transform.

    A letter read in the same region as right after the previous step is
    treated as simultaneous (flag 0); the controller below is fed the region
    of the strictly monotonic play obtained by spacing simultaneous letters
    infinitesimally apart.
    """
    clocks = ctrl.clocks

    def step(mem, a, phi):
        mz, rho, ages_t, started = mem
        ages = dict(ages_t)
        flag = 0 if started and phi == rho else 1
        if flag:
            cur = sorted((r, x) for x, (c, r) in ages.items() if c == 1)
            older = [(r, x) for x, (c, r) in ages.items() if c == 2]
            shift = len(cur)
            for i, (_, x) in enumerate(cur):
                ages[x] = (2, i + 1)
            for r, x in older:
                ages[x] = (2, r + shift)
        fed = _perturbed_region(phi, ages, flag)
        mz2, b, ys = ctrl.step(mz, (a, flag), fed)
        top = max((r for c, r in ages.values() if c == 1), default=0)
        for y in ys:
            ages[y] = (0, 0) if flag else (1, top + 1)
        return (mz2, region_reset(phi, frozenset(ys)), _normalise_ages(ages), True), b, ys

    init = (ctrl.initial, zero_region(clocks, ctrl.table_m),
            tuple(sorted((x, (0, 0)) for x in clocks)), False)
    out = materialize(tuple(inputs), ctrl.outputs, clocks, ctrl.table_m, init, step)
    return out.declare(ctrl.m) if ctrl.m != ctrl.table_m else out


def zero_backmap(ctrl: KMController, inputs: Sequence, start) -> KMController:
    """Controller for the game before the zero-starting transform: the start
    letter's step is taken up front (all clocks are 0 then anyway)."""
    r0 = zero_region(ctrl.clocks, ctrl.table_m)
    first, _, _ = ctrl.step(ctrl.initial, start, r0)
    keep = {}
    queue = deque([first])
    seen = {first}
    while queue:
        l = queue.popleft()
        for a in inputs:
            for r in ctrl.regions():
                l2, b, ys = ctrl.step(l, a, r)
                keep[(l, a, r)] = (l2, b, ys)
                if l2 not in seen:
                    seen.add(l2)
                    queue.append(l2)
    memory = tuple(l for l in ctrl.memory if l in seen)
    return KMController(tuple(inputs), ctrl.outputs, ctrl.clocks, ctrl.m, memory, first, keep,
                        ctrl.resolution)


# -- decision procedures ---------------------------------------------------------


@dataclass
class SynthesisResult:
    controller: KMController
    m: int
    untimed: MealyController
    enriched_inputs: int
    stats: dict = field(default_factory=dict)

    @property
    def bound(self) -> int:
        """|A'| * |L| + 1 for the untimed controller's memory L."""
        return self.enriched_inputs * len(self.untimed.memory) + 1


def _zero_clock(g: GameSpec, cap: int):
    out = _untimed_game(g.condition, g.inputs, g.outputs, cap, "untimed game (k=0)")
    if out.controller is None:
        return None, out
    mealy = out.controller

    def step(l, a, r):
        l2, b = mealy.step(l, a)
        return l2, b, frozenset()

    ctrl = materialize(g.inputs, g.outputs, (), 1, mealy.initial, step)
    return ctrl, out


def _lift_and_map(g: GameSpec, prepared: GameSpec, mealy: MealyController, k: int, m: int,
                  clocks: tuple, stats: dict) -> tuple[KMController, EmptinessResult]:
    complete = complete_controller(mealy, k, m, clocks)
    lstats = LiftStats()
    lifted = lift_controller(complete, k, m, prepared.inputs, prepared.outputs, lstats)
    stats["lift_internal_steps"] = lstats.internal_steps
    stats["lift_max_depth"] = lstats.max_depth
    gz_inputs = tuple(dict.fromkeys(a for a, _ in prepared.inputs))
    back = strict_backmap(lifted, gz_inputs)
    ctrl = zero_backmap(back, g.inputs, start_symbol(g.inputs))
    stats["controller_memory"] = len(ctrl.memory)
    return ctrl, check_controller(g, ctrl)


def _escalation(m: int) -> list[int]:
    """1, 2, 4, ... below m, then m itself."""
    out = []
    c = 1
    while c < m:
        out.append(c)
        c *= 2
    return out + [m]


def _solve_exact_m(g, prepared, k, m, clocks, cap):
    w = build_Wprime(prepared, k, m, clocks)
    a1 = enriched_inputs(prepared.inputs, clocks)
    b1 = enriched_outputs(prepared.outputs, clocks)
    out = _untimed_game(w, a1, b1, cap, f"untimed game for W' (k={k}, m={m})")
    if out.controller is None:
        return None
    stats = {"dpa_states": out.dpa_states, "arena": out.arena_vertices, "solved_m": m}
    ctrl, check = _lift_and_map(g, prepared, out.controller, k, m, clocks, stats)
    if not check.empty:
        raise SynthesisError(
            "synthesised controller fails the exact check; witness "
            f"stem={check.stem!r} loop={check.loop!r}"
        )
    return SynthesisResult(ctrl, m, out.controller, len(a1), stats)


def solve_km(g: GameSpec, k: int, m: int, cap: int = DEFAULT_STATE_CAP,
             clocks: Sequence[str] | None = None) -> SynthesisResult | None:
    """A winning k,m-controller for Player II, or None if none exists.

    Smaller constants are tried first: a winning k,m'-controller with m' <= m
    is already a k,m-controller, and its game is much smaller.
    """
    if k < 0 or m < 0:
        raise ValueError("k and m must be nonnegative")
    if k == 0:
        ctrl, out = _zero_clock(g, cap)
        if ctrl is None:
            return None
        return SynthesisResult(ctrl.declare(max(m, 1)), m, out.controller, len(g.inputs) + 1,
                               {"dpa_states": out.dpa_states, "arena": out.arena_vertices})
    if m < 1:
        raise ValueError("m must be at least 1 when k > 0")
    clocks = default_clocks(k) if clocks is None else tuple(clocks)
    prepared = _prepare(g)
    for m1 in _escalation(m):
        res = _solve_exact_m(g, prepared, k, m1, clocks, cap)
        if res is not None:
            res.controller = res.controller.declare(m)
            res.m = m
            return res
    return None


def solve_k(g: GameSpec, k: int, cap: int = DEFAULT_STATE_CAP,
            clocks: Sequence[str] | None = None) -> SynthesisResult | None:
    """A winning k-controller with m = |A'| * |L| + 1, or None.

    The untimed controller is lifted at increasing resolutions up to m; the
    first lift that passes the exact check is returned, declared with m.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        ctrl, out = _zero_clock(g, cap)
        if ctrl is None:
            return None
        res = SynthesisResult(ctrl, 1, out.controller, len(g.inputs) + 1,
                              {"dpa_states": out.dpa_states, "arena": out.arena_vertices})
        res.m = res.bound
        res.controller = ctrl.declare(res.m)
        return res
    clocks = default_clocks(k) if clocks is None else tuple(clocks)
    prepared = _prepare(g)
    w = build_Wdoubleprime(prepared, k, clocks)
    a1 = enriched_inputs(prepared.inputs, clocks)
    b1 = enriched_outputs(prepared.outputs, clocks)
    out = _untimed_game(w, a1, b1, cap, f"untimed game for W'' (k={k})")
    if out.controller is None:
        return None
    m = len(a1) * len(out.controller.memory) + 1
    stats = {"dpa_states": out.dpa_states, "arena": out.arena_vertices}
    check = None
    for m1 in _escalation(m):
        ctrl, check = _lift_and_map(g, prepared, out.controller, k, m1, clocks, stats)
        if check.empty:
            stats["lift_m"] = m1
            return SynthesisResult(ctrl.declare(m), m, out.controller, len(a1), stats)
    raise SynthesisError(
        "lifted controller fails the exact check; witness "
        f"stem={check.stem!r} loop={check.loop!r}"
    )
