"""Clock constraints: syntax tree, concrete-syntax parser and evaluation.

Concrete syntax::

    x - y <= 3     x >= 1     x = 0     !phi     phi && psi     phi || psi
    true           false      ( phi )
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

OPS = ("<=", ">=", "<", ">", "=")


class ConstraintError(ValueError):
    """Raised on malformed constraint text or unknown clocks."""


class Constraint:
    """Base class of constraint nodes."""

    def evaluate(self, valuation: Mapping[str, Fraction]) -> bool:
        raise NotImplementedError

    def clocks(self) -> frozenset:
        return frozenset()

    def max_constant(self) -> int:
        return 0

    def rename(self, mapping: Mapping[str, str]) -> "Constraint":
        return self

    def __and__(self, other: "Constraint") -> "Constraint":
        return conj(self, other)

    def __or__(self, other: "Constraint") -> "Constraint":
        return disj(self, other)

    def __invert__(self) -> "Constraint":
        return Not(self)


@dataclass(frozen=True)
class Bool(Constraint):
    value: bool

    def evaluate(self, valuation):
        return self.value

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Bool(True)
FALSE = Bool(False)


def _compare(lhs: Fraction, op: str, rhs: int) -> bool:
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == "=":
        return lhs == rhs
    if op == ">=":
        return lhs >= rhs
    if op == ">":
        return lhs > rhs
    raise ConstraintError(f"unknown comparison {op!r}")


@dataclass(frozen=True)
class Atom(Constraint):
    """``left - right op const`` (``right`` is None for a plain clock bound)."""

    left: str
    op: str
    const: int
    right: str | None = None

    def evaluate(self, valuation):
        try:
            value = valuation[self.left]
            if self.right is not None:
                value = value - valuation[self.right]
        except KeyError as exc:
            raise ConstraintError(f"unknown clock {exc.args[0]!r}") from None
        return _compare(value, self.op, self.const)

    def clocks(self):
        if self.right is None:
            return frozenset((self.left,))
        return frozenset((self.left, self.right))

    def max_constant(self):
        return abs(self.const)

    def rename(self, mapping):
        right = None if self.right is None else mapping.get(self.right, self.right)
        return Atom(mapping.get(self.left, self.left), self.op, self.const, right)

    def __str__(self):
        if self.right is None:
            return f"{self.left} {self.op} {self.const}"
        return f"{self.left} - {self.right} {self.op} {self.const}"


@dataclass(frozen=True)
class Not(Constraint):
    arg: Constraint

    def evaluate(self, valuation):
        return not self.arg.evaluate(valuation)

    def clocks(self):
        return self.arg.clocks()

    def max_constant(self):
        return self.arg.max_constant()

    def rename(self, mapping):
        return Not(self.arg.rename(mapping))

    def __str__(self):
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And(Constraint):
    args: tuple

    def evaluate(self, valuation):
        return all(a.evaluate(valuation) for a in self.args)

    def clocks(self):
        return frozenset().union(*(a.clocks() for a in self.args))

    def max_constant(self):
        return max((a.max_constant() for a in self.args), default=0)

    def rename(self, mapping):
        return And(tuple(a.rename(mapping) for a in self.args))

    def __str__(self):
        return " && ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Or(Constraint):
    args: tuple

    def evaluate(self, valuation):
        return any(a.evaluate(valuation) for a in self.args)

    def clocks(self):
        return frozenset().union(*(a.clocks() for a in self.args))

    def max_constant(self):
        return max((a.max_constant() for a in self.args), default=0)

    def rename(self, mapping):
        return Or(tuple(a.rename(mapping) for a in self.args))

    def __str__(self):
        return " || ".join(_wrap(a) for a in self.args)


def _wrap(c: Constraint) -> str:
    if isinstance(c, (And, Or)):
        return f"({c})"
    return str(c)


def conj(*parts: Constraint) -> Constraint:
    args = []
    for p in parts:
        if p == TRUE:
            continue
        if p == FALSE:
            return FALSE
        args.extend(p.args if isinstance(p, And) else (p,))
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*parts: Constraint) -> Constraint:
    args = []
    for p in parts:
        if p == FALSE:
            continue
        if p == TRUE:
            return TRUE
        args.extend(p.args if isinstance(p, Or) else (p,))
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(tuple(args))


def eval_constraint(valuation: Mapping[str, Fraction], constraint: Constraint) -> bool:
    """Decide ``valuation |= constraint``; unknown clocks raise ConstraintError."""
    missing = constraint.clocks() - set(valuation)
    if missing:
        raise ConstraintError(f"unknown clock(s) {sorted(missing)}")
    return constraint.evaluate(valuation)


# -- parser -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><=|>=|==|&&|\|\||[<>=!()\-]))"
)


def _tokens(text: str) -> Iterator[tuple[str, str, int]]:
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            return
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ConstraintError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        yield kind, m.group(kind), m.start(kind)
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ConstraintError(f"expected {value or 'token'} at position {tok[2]}")
        self.i += 1
        return tok

    def parse(self) -> Constraint:
        c = self.disjunction()
        if self.peek()[0] is not None:
            raise ConstraintError(f"trailing input at position {self.peek()[2]}")
        return c

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek()[1] == "||":
            self.take()
            parts.append(self.conjunction())
        return disj(*parts) if len(parts) > 1 else parts[0]

    def conjunction(self):
        parts = [self.unary()]
        while self.peek()[1] == "&&":
            self.take()
            parts.append(self.unary())
        return conj(*parts) if len(parts) > 1 else parts[0]

    def unary(self):
        kind, value, pos = self.peek()
        if value == "!":
            self.take()
            return Not(self.unary())
        if value == "(":
            self.take()
            c = self.disjunction()
            self.take(")")
            return c
        if kind == "name" and value in ("true", "false"):
            self.take()
            return TRUE if value == "true" else FALSE
        if kind == "name":
            return self.atom()
        raise ConstraintError(f"unexpected {value!r} at position {pos}")

    def atom(self):
        _, left, _ = self.take()
        right = None
        if self.peek()[1] == "-":
            self.take()
            kind, right, pos = self.take()
            if kind != "name":
                raise ConstraintError(f"expected clock name at position {pos}")
        _, op, pos = self.take()
        if op == "==":
            op = "="
        if op not in OPS:
            raise ConstraintError(f"expected comparison at position {pos}")
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        kind, num, pos = self.take()
        if kind != "num":
            raise ConstraintError(f"expected integer at position {pos}")
        return Atom(left, op, sign * int(num), right)


def parse_constraint(text: str) -> Constraint:
    """Parse the concrete constraint syntax."""
    return _Parser(text).parse()
