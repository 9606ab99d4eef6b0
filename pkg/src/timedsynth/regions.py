"""Clock regions and fractional regions over exact rational valuations.

A region is identified by the clipped class of every clock value and of every
pairwise clock difference, so two valuations share a region exactly when they
satisfy the same atomic constraints ``x ~ z`` and ``x - y ~ z`` with
``|z| <= m``.  Each region also carries one member valuation (``rep``), used to
evaluate guards and to compute successors; it is not part of equality.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .constraints import TRUE, Atom, Constraint, conj

Valuation = Mapping[str, Fraction]


class RegionError(ValueError):
    pass


def value_class(v: Fraction, m: int) -> int:
    """Class of ``v`` w.r.t. the integers in [-m, m].

    ``2c`` encodes ``v == c``, ``2c + 1`` encodes ``c < v < c + 1``;
    values above ``m`` map to ``2m + 1`` and values below ``-m`` to ``-2m - 1``.
    """
    if v > m:
        return 2 * m + 1
    if v < -m:
        return -2 * m - 1
    f = math.floor(v)
    return 2 * f if v == f else 2 * f + 1


def default_clocks(k: int) -> tuple[str, ...]:
    if k <= 3:
        return ("x", "y", "z")[:k]
    return tuple(f"x{i}" for i in range(1, k + 1))


def _normalise(values: Sequence[Fraction]) -> tuple[Fraction, ...]:
    # keep integer parts, replace fractional parts by their rank / (n + 1)
    fracs = sorted({v - math.floor(v) for v in values} - {0})
    if not fracs:
        return tuple(Fraction(math.floor(v)) for v in values)
    rank = {f: Fraction(i + 1, len(fracs) + 1) for i, f in enumerate(fracs)}
    out = []
    for v in values:
        fl = math.floor(v)
        f = v - fl
        out.append(Fraction(fl) + (rank[f] if f else 0))
    return tuple(out)


def _key(values: Sequence[Fraction], m: int) -> tuple:
    single = tuple(value_class(v, m) for v in values)
    pairs = tuple(
        value_class(values[i] - values[j], m)
        for i in range(len(values))
        for j in range(i + 1, len(values))
    )
    return (single, pairs)


@dataclass(frozen=True)
class Region:
    clocks: tuple[str, ...]
    m: int
    key: tuple
    rep: tuple = field(compare=False, repr=False)

    @classmethod
    def from_values(cls, clocks: tuple[str, ...], values: Sequence[Fraction], m: int) -> "Region":
        rep = _normalise(values)
        return cls(clocks, m, _key(rep, m), rep)

    @property
    def valuation(self) -> dict[str, Fraction]:
        return dict(zip(self.clocks, self.rep))

    def index(self, clock: str) -> int:
        try:
            return self.clocks.index(clock)
        except ValueError:
            raise RegionError(f"unknown clock {clock!r}") from None

    def above(self, clock: str) -> bool:
        """True iff the clock exceeds the maximal constant."""
        return self.key[0][self.index(clock)] > 2 * self.m

    def int_part(self, clock: str) -> int | None:
        """Integral part of the clock, or None for the ``> m`` class."""
        c = self.key[0][self.index(clock)]
        return None if c > 2 * self.m else c // 2

    def frac_zero(self, clock: str) -> bool | None:
        c = self.key[0][self.index(clock)]
        return None if c > 2 * self.m else c % 2 == 0

    def frac_less(self, x: str, y: str) -> bool:
        vx, vy = self.rep[self.index(x)], self.rep[self.index(y)]
        return vx - math.floor(vx) < vy - math.floor(vy)

    def frac_order(self) -> tuple[tuple[str, ...], ...]:
        """Clocks with value <= m grouped by increasing fractional part."""
        groups: dict[Fraction, list[str]] = {}
        for name, v in zip(self.clocks, self.rep):
            if v <= self.m:
                groups.setdefault(v - math.floor(v), []).append(name)
        return tuple(tuple(groups[f]) for f in sorted(groups))

    @property
    def is_unbounded(self) -> bool:
        return all(c > 2 * self.m for c in self.key[0])

    def satisfies(self, constraint: Constraint) -> bool:
        return constraint.evaluate(self.valuation)

    def __str__(self) -> str:
        return str(characteristic_constraint(self))


def region_of(valuation: Valuation, m: int, clocks: Sequence[str] | None = None) -> Region:
    """The region of ``valuation`` (clock order: ``clocks`` or sorted names)."""
    if m < 0:
        raise RegionError("maximal constant must be nonnegative")
    names = tuple(sorted(valuation)) if clocks is None else tuple(clocks)
    values = []
    for name in names:
        v = Fraction(valuation[name])
        if v < 0:
            raise RegionError(f"negative clock value for {name!r}")
        values.append(v)
    return Region.from_values(names, values, m)


def zero_region(clocks: Sequence[str], m: int) -> Region:
    return Region.from_values(tuple(clocks), [Fraction(0)] * len(clocks), m)


def _successor_values(values: Sequence[Fraction], m: int) -> tuple[Fraction, ...] | None:
    """A member valuation of the immediate time successor, None if unbounded."""
    if any(v <= m and v == math.floor(v) for v in values):
        gaps = [math.floor(v) + 1 - v for v in values if v < m]
        eps = min(gaps, default=Fraction(1)) / 2
        return tuple(v + eps for v in values)
    below = [math.floor(v) + 1 - v for v in values if v < m]
    if not below:
        return None
    delta = min(below)
    return tuple(v + delta for v in values)


@lru_cache(maxsize=None)
def region_time_successor(r: Region) -> Region:
    """Immediate time successor; the all-above-m region is its own successor."""
    nxt = _successor_values(r.rep, r.m)
    if nxt is None:
        return r
    return Region.from_values(r.clocks, nxt, r.m)


@lru_cache(maxsize=None)
def successor_chain(r: Region) -> tuple[Region, ...]:
    """``r`` followed by all its strict time successors, in order."""
    chain = [r]
    while True:
        nxt = region_time_successor(chain[-1])
        if nxt == chain[-1]:
            return tuple(chain)
        chain.append(nxt)


def region_leq(r: Region, other: Region) -> bool:
    """``r`` is ``other`` or precedes it in time."""
    return other in successor_chain(r)


@lru_cache(maxsize=None)
def region_reset(r: Region, resets: frozenset) -> Region:
    """Region of ``[Y -> 0] mu`` for members ``mu`` of ``r``."""
    if not resets:
        return r
    unknown = set(resets) - set(r.clocks)
    if unknown:
        raise RegionError(f"reset of unknown clocks {sorted(unknown)}")
    values = [Fraction(0) if c in resets else v for c, v in zip(r.clocks, r.rep)]
    return Region.from_values(r.clocks, values, r.m)


def enumerate_regions(k: int, m: int, clocks: Sequence[str] | None = None) -> list[Region]:
    """All regions over ``k`` clocks with maximal constant ``m``, sorted by key."""
    if k < 0 or m < 0:
        raise RegionError("clock count and maximal constant must be nonnegative")
    names = default_clocks(k) if clocks is None else tuple(clocks)
    if len(names) != k:
        raise RegionError("clock names do not match k")
    start = zero_region(names, m)
    seen = {start}
    frontier = [start]
    subsets = [frozenset(s) for n in range(1, k + 1) for s in itertools.combinations(names, n)]
    # every valuation is reachable from zero by elapsing and resetting
    while frontier:
        r = frontier.pop()
        for nxt in [region_time_successor(r)] + [region_reset(r, y) for y in subsets]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return sorted(seen, key=lambda r: r.key)


def _class_constraint(left: str, right: str | None, cls: int, m: int) -> Constraint:
    if cls > 2 * m:
        return Atom(left, ">", m, right)
    if cls < -2 * m:
        return Atom(left, "<", -m, right)
    if cls % 2 == 0:
        return Atom(left, "=", cls // 2, right)
    lo = (cls - 1) // 2
    return conj(Atom(left, ">", lo, right), Atom(left, "<", lo + 1, right))


def characteristic_constraint(r: Region) -> Constraint:
    """A constraint whose models are exactly the members of ``r``."""
    singles, pairs = r.key
    parts = [_class_constraint(c, None, cls, r.m) for c, cls in zip(r.clocks, singles)]
    it = iter(pairs)
    n = len(r.clocks)
    for i in range(n):
        for j in range(i + 1, n):
            cls = next(it)
            ci, cj = singles[i], singles[j]
            # implied when both bounded and one of them is an integer
            if ci <= 2 * r.m and cj <= 2 * r.m and (ci % 2 == 0 or cj % 2 == 0):
                continue
            parts.append(_class_constraint(r.clocks[i], r.clocks[j], cls, r.m))
    return conj(*parts) if parts else TRUE


# -- fractional regions -------------------------------------------------------


@dataclass(frozen=True)
class FractionalRegion:
    """Order and zero-ness of fractional parts of the tracked clocks.

    ``classes`` groups the domain by increasing fractional part; when ``zero``
    holds, the first group has fractional part 0.
    """

    classes: tuple = ()
    zero: bool = False

    def __post_init__(self):
        norm = tuple(tuple(sorted(c)) for c in self.classes if c)
        object.__setattr__(self, "classes", norm)
        if not norm and self.zero:
            object.__setattr__(self, "zero", False)

    @property
    def dom(self) -> frozenset:
        return frozenset(c for cls in self.classes for c in cls)

    @property
    def one(self) -> frozenset:
        return frozenset(self.classes[0]) if self.zero else frozenset()

    def position(self, clock: str) -> int:
        for i, cls in enumerate(self.classes):
            if clock in cls:
                return i
        raise RegionError(f"clock {clock!r} not tracked")

    def less(self, x: str, y: str) -> bool:
        return self.position(x) < self.position(y)

    def restrict(self, clocks: Iterable[str]) -> "FractionalRegion":
        keep = set(clocks)
        classes = tuple(tuple(c for c in cls if c in keep) for cls in self.classes)
        zero = self.zero and bool(classes and classes[0])
        return FractionalRegion(classes, zero)

    def reset(self, clocks: Iterable[str]) -> "FractionalRegion":
        """Add/move ``clocks`` to fractional part zero."""
        ys = set(clocks)
        if not ys:
            return self
        rest = tuple(tuple(c for c in cls if c not in ys) for cls in self.classes)
        if self.zero:
            head = tuple(rest[0]) + tuple(ys) if rest else tuple(ys)
            return FractionalRegion((head,) + rest[1:], True)
        return FractionalRegion((tuple(ys),) + rest, True)

    def __str__(self) -> str:
        if not self.classes:
            return "f0"
        parts = []
        for i, cls in enumerate(self.classes):
            parts.append("=".join(cls) + ("=0" if i == 0 and self.zero else ""))
        return "{" + " < ".join(parts) + "}"


EMPTY_FREGION = FractionalRegion()


def frac_region_of(valuation: Valuation) -> FractionalRegion:
    groups: dict[Fraction, list[str]] = {}
    for name, v in valuation.items():
        v = Fraction(v)
        groups.setdefault(v - math.floor(v), []).append(name)
    keys = sorted(groups)
    return FractionalRegion(tuple(tuple(groups[f]) for f in keys), bool(keys) and keys[0] == 0)


def enumerate_frac_regions(clocks: Sequence[str]) -> list[FractionalRegion]:
    """All fractional regions whose domain is a subset of ``clocks``."""
    out = []
    names = tuple(clocks)
    for n in range(len(names) + 1):
        for dom in itertools.combinations(names, n):
            for blocks in _ordered_partitions(list(dom)):
                out.append(FractionalRegion(blocks, False))
                out.append(FractionalRegion(blocks, True))
    uniq = list(dict.fromkeys(out))
    return sorted(uniq, key=lambda f: (len(f.dom), sorted(f.dom), f.zero, f.classes))


def _ordered_partitions(items: list) -> Iterable[tuple]:
    if not items:
        yield ()
        return
    for n in range(1, len(items) + 1):
        for first in itertools.combinations(items, n):
            rest = [i for i in items if i not in first]
            for tail in _ordered_partitions(rest):
                yield (first,) + tail


def agrees(f: FractionalRegion, r: Region) -> bool:
    """Whether ``f`` agrees with ``r`` on all tracked clocks."""
    dom = sorted(f.dom)
    for x in dom:
        if (x in f.one) != (r.above(x) or bool(r.frac_zero(x))):
            return False
    for x in dom:
        for y in dom:
            if x == y:
                continue
            if f.less(x, y) != (r.above(x) or r.above(y) or r.frac_less(x, y)):
                return False
    return True


def xsuccessor(r: Region, f: FractionalRegion) -> Region | None:
    """Least region ``r' >= r`` (in time order) agreeing with ``f``."""
    for nxt in successor_chain(r):
        if agrees(f, nxt):
            return nxt
    return None


def frac_immediate_successor(f: FractionalRegion) -> FractionalRegion:
    if not f.classes:
        raise RegionError("immediate successor of the empty fractional region")
    if f.zero:
        return FractionalRegion(f.classes, False)
    return FractionalRegion((f.classes[-1],) + f.classes[:-1], True)
