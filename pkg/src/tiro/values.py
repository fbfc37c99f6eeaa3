"""Exact extended-rational arithmetic.

All quantitative computation in this package is exact: timestamps, weights
and distances are `fractions.Fraction` values, extended where needed with a
single positive infinity `INF`.  Arithmetic saturates at infinity; products
of infinity with nonpositive scalars are rejected rather than guessed.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ParseError


class _Infinity:
    """The single positive infinite value of the extended rationals."""

    __slots__ = ()

    def __repr__(self):
        return "inf"

    # -- ordering: greater than every rational, equal only to itself --
    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("tiro-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    # -- saturating arithmetic --
    def __add__(self, other):
        if isinstance(other, (Fraction, int)) or other is self:
            return self
        return NotImplemented

    __radd__ = __add__

    def __mul__(self, other):
        if other is self:
            return self
        if isinstance(other, (Fraction, int)):
            if other > 0:
                return self
            raise ArithmeticError("cannot multiply infinity by %s" % (other,))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        raise ArithmeticError("negative infinity is not representable")

    def __sub__(self, other):
        if isinstance(other, (Fraction, int)):
            return self
        raise ArithmeticError("inf - inf is undefined")

    def __rsub__(self, other):
        raise ArithmeticError("cannot subtract infinity")


INF = _Infinity()

#: An extended value is either a Fraction (possibly negative) or INF.
Value = object


def is_finite(value) -> bool:
    return value is not INF


def parse_rational(text: str, line=None) -> Fraction:
    """Parse ``p/q``, decimal, or integer literals exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError("not a rational number: %r" % text, line=line) from None


def parse_value(text: str, line=None):
    """Like :func:`parse_rational` but also accepts ``inf``."""
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    return parse_rational(text, line=line)


def format_value(value) -> str:
    if value is INF:
        return "inf"
    frac = Fraction(value)
    if frac.denominator == 1:
        return str(frac.numerator)
    return "%d/%d" % (frac.numerator, frac.denominator)


def value_sum(values):
    """Sum of extended values, saturating at infinity."""
    total = Fraction(0)
    for v in values:
        if v is INF:
            return INF
        total += v
    return total
