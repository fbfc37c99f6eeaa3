"""Clock constraints: conjunctions of atoms ``x OP c``.

Guards are conjunctions only, so each guard projects to one interval per
clock; satisfiability, determinism overlap and the shifted-guard ambiguity
check all reduce to exact interval arithmetic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .errors import ParseError
from .values import parse_rational

OPS = ("<=", ">=", "==", "<", ">", "=")


@dataclass(frozen=True)
class Atom:
    clock: str
    op: str  # one of < <= = >= >
    constant: Fraction

    def __post_init__(self):
        if self.op not in ("<", "<=", "=", ">=", ">"):
            raise ParseError("bad relation %r" % self.op)
        if self.constant < 0:
            raise ParseError("guard constants must be nonnegative")

    def holds(self, value: Fraction) -> bool:
        c = self.constant
        return {"<": value < c, "<=": value <= c, "=": value == c,
                ">=": value >= c, ">": value > c}[self.op]

    def __str__(self):
        return "%s %s %s" % (self.clock, self.op, self.constant)


@dataclass(frozen=True)
class Interval:
    """Rational interval with open/closed ends; ``None`` bounds are infinite."""

    lo: Optional[Fraction]
    lo_open: bool
    hi: Optional[Fraction]
    hi_open: bool

    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo is None:
            lo, lo_open = other.lo, other.lo_open
        elif other.lo is None or self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif other.lo > self.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi is None:
            hi, hi_open = other.hi, other.hi_open
        elif other.hi is None or self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif other.hi < self.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        return Interval(lo, lo_open, hi, hi_open)

    def minus(self, other: "Interval") -> "Interval":
        """{a - b : a in self, b in other} for nonempty operands."""
        lo = None if (self.lo is None or other.hi is None) else self.lo - other.hi
        lo_open = self.lo_open or other.hi_open
        hi = None if (self.hi is None or other.lo is None) else self.hi - other.lo
        hi_open = self.hi_open or other.lo_open
        return Interval(lo, lo_open, hi, hi_open)


NONNEG = Interval(Fraction(0), False, None, False)


def _atom_interval(atom: Atom) -> Interval:
    c = atom.constant
    return {
        "<": Interval(None, False, c, True),
        "<=": Interval(None, False, c, False),
        "=": Interval(c, False, c, False),
        ">=": Interval(c, False, None, False),
        ">": Interval(c, True, None, False),
    }[atom.op]


@dataclass(frozen=True)
class Guard:
    atoms: Tuple[Atom, ...] = ()

    def satisfied(self, valuation: Dict[str, Fraction]) -> bool:
        return all(atom.holds(valuation[atom.clock]) for atom in self.atoms)

    def clocks(self) -> frozenset:
        return frozenset(atom.clock for atom in self.atoms)

    def interval(self, clock: str) -> Interval:
        box = NONNEG
        for atom in self.atoms:
            if atom.clock == clock:
                box = box.intersect(_atom_interval(atom))
        return box

    def is_satisfiable(self) -> bool:
        return not any(self.interval(c).is_empty() for c in self.clocks())

    def max_constant(self) -> Fraction:
        return max((atom.constant for atom in self.atoms), default=Fraction(0))

    def has_equality(self) -> bool:
        """True when some clock is pinned to a single value."""
        for clock in self.clocks():
            box = self.interval(clock)
            if box.lo is not None and box.lo == box.hi and not box.lo_open:
                return True
        return False

    def scaled(self, factor: Fraction) -> "Guard":
        return Guard(tuple(
            Atom(a.clock, a.op, a.constant * factor) for a in self.atoms))

    def renamed(self, mapping: Dict[str, str]) -> "Guard":
        return Guard(tuple(
            Atom(mapping.get(a.clock, a.clock), a.op, a.constant) for a in self.atoms))

    def conjoin(self, other: "Guard") -> "Guard":
        return Guard(self.atoms + other.atoms)

    def __str__(self):
        if not self.atoms:
            return "true"
        return " && ".join(str(a) for a in self.atoms)


TRUE = Guard()


def guards_overlap(g1: Guard, g2: Guard) -> bool:
    """Is g1 AND g2 satisfiable by one valuation?"""
    for clock in g1.clocks() | g2.clocks():
        if g1.interval(clock).intersect(g2.interval(clock)).is_empty():
            return False
    return True


def guards_shift_compatible(g1: Guard, g2: Guard) -> bool:
    """Does some valuation satisfy g1 with a uniform time shift into g2?

    Decides the existence of x and t (of either sign) with g1(x) and
    g2(x + t); the negation is the strong-inconsistency used by location
    unambiguity.
    """
    window = Interval(None, False, None, False)
    for clock in g1.clocks() | g2.clocks():
        i1 = g1.interval(clock)
        i2 = g2.interval(clock)
        if i1.is_empty() or i2.is_empty():
            return False
        window = window.intersect(i2.minus(i1))
        if window.is_empty():
            return False
    return True


_ATOM_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*(<=|>=|==|<|>|=)\s*([^\s]+)\s*$")


def parse_guard(text: str, line=None) -> Guard:
    text = text.strip()
    if text in ("", "true", "True"):
        return TRUE
    atoms = []
    for part in text.split("&&"):
        m = _ATOM_RE.match(part)
        if not m:
            raise ParseError("bad guard atom %r" % part.strip(), line=line)
        clock, op, const = m.groups()
        if op == "==":
            op = "="
        atoms.append(Atom(clock, op, parse_rational(const, line=line)))
    return Guard(tuple(atoms))
