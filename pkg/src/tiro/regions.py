"""Clock regions with integral constants.

A region fixes, for every clock: its integer part up to a global ceiling
(clocks beyond the ceiling are collapsed), whether its fractional part is
zero, and the relative order of the positive fractional parts.  Successor
computation, resets, guard satisfaction and the corner vertices of the
region closure are all exact and purely combinatorial.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .errors import DomainError

UNBOUNDED = None  # integer-part marker for clocks above the ceiling


@dataclass(frozen=True)
class Region:
    ceiling: int
    ipart: Tuple[Optional[int], ...]
    zero: frozenset  # indices of bounded clocks with fractional part 0
    order: Tuple[frozenset, ...]  # positive-fraction classes, ascending

    def __post_init__(self):
        bounded = {i for i, p in enumerate(self.ipart) if p is not UNBOUNDED}
        classified = set(self.zero)
        for group in self.order:
            if not group:
                raise DomainError("empty fractional class")
            classified |= group
        if classified != bounded:
            raise DomainError("fractional classes must partition bounded clocks")
        for i, p in enumerate(self.ipart):
            if p is not UNBOUNDED:
                if not 0 <= p <= self.ceiling:
                    raise DomainError("integer part out of range")
                if p == self.ceiling and i not in self.zero:
                    raise DomainError("clock at the ceiling must have zero fraction")

    @staticmethod
    def initial(n_clocks: int, ceiling: int) -> "Region":
        return Region(ceiling, tuple(0 for _ in range(n_clocks)),
                      frozenset(range(n_clocks)), ())

    @property
    def all_unbounded(self) -> bool:
        return all(p is UNBOUNDED for p in self.ipart)

    # -- time flow ----------------------------------------------------------

    def successor(self) -> Optional["Region"]:
        """Immediate time-successor region; None once every clock is unbounded."""
        if self.all_unbounded:
            return None
        if self.zero:
            stay, gone = [], []
            for i in sorted(self.zero):
                (gone if self.ipart[i] == self.ceiling else stay).append(i)
            ipart = tuple(UNBOUNDED if i in gone else p
                          for i, p in enumerate(self.ipart))
            order = ((frozenset(stay),) if stay else ()) + self.order
            return Region(self.ceiling, ipart, frozenset(), order)
        top = self.order[-1]
        ipart = tuple(p + 1 if i in top else p for i, p in enumerate(self.ipart))
        return Region(self.ceiling, ipart, top, self.order[:-1])

    def can_advance(self) -> bool:
        """Full-unit diagonal flow stays inside: open region or all unbounded."""
        return not self.zero and (bool(self.order) or self.all_unbounded)

    # -- switches -----------------------------------------------------------

    def reset(self, indices) -> "Region":
        indices = frozenset(indices)
        ipart = tuple(0 if i in indices else p for i, p in enumerate(self.ipart))
        order = tuple(g - indices for g in self.order)
        return Region(self.ceiling, ipart,
                      (self.zero - indices) | indices,
                      tuple(g for g in order if g))

    def atom_holds(self, index: int, op: str, constant: int) -> bool:
        p = self.ipart[index]
        c = constant
        if p is UNBOUNDED:
            # value lies in (ceiling, oo) and c <= ceiling
            return op in (">", ">=")
        if index in self.zero:
            # value is exactly p
            return {"<": p < c, "<=": p <= c, "=": p == c,
                    ">=": p >= c, ">": p > c}[op]
        # value lies strictly between p and p + 1
        return {"<": p + 1 <= c, "<=": p + 1 <= c, "=": False,
                ">=": p >= c, ">": p >= c}[op]

    def satisfies(self, guard, clock_index) -> bool:
        return all(self.atom_holds(clock_index[a.clock], a.op, int(a.constant))
                   for a in guard.atoms)

    # -- corners ------------------------------------------------------------

    def corner_count(self) -> int:
        return len(self.order) + 1

    def corner(self, k: int) -> Tuple[int, ...]:
        """Vertex of the closure: the k largest fractional classes round up."""
        if not 0 <= k <= len(self.order):
            raise DomainError("corner index out of range")
        up = set()
        for group in self.order[len(self.order) - k:]:
            up |= group
        out = []
        for i, p in enumerate(self.ipart):
            if p is UNBOUNDED:
                out.append(self.ceiling + 1)
            else:
                out.append(p + 1 if i in up else p)
        return tuple(out)

    # -- exact membership (used by witness decoding) -------------------------

    def contains(self, valuation: Tuple[Fraction, ...]) -> bool:
        if len(valuation) != len(self.ipart):
            return False
        fracs = {}
        for i, v in enumerate(valuation):
            p = self.ipart[i]
            if p is UNBOUNDED:
                if v <= self.ceiling:
                    return False
                continue
            if not p <= v < p + 1:
                return False
            frac = v - p
            if (frac == 0) != (i in self.zero):
                return False
            if frac > 0:
                fracs[i] = frac
        reps = []
        for group in self.order:
            vals = {fracs[i] for i in group}
            if len(vals) != 1:
                return False
            reps.append(vals.pop())
        return all(a < b for a, b in zip(reps, reps[1:]))
