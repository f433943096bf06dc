"""Exact arithmetic of the standard MV-algebra restricted to rationals.

Every truth value and every grade in the package is a :class:`UnitRational`,
a reduced fraction in the closed unit interval. The operations below are the
Łukasiewicz connectives evaluated on such values; they never leave the
rationals and never touch floating point.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import lcm

__all__ = [
    "UnitRational",
    "ZERO",
    "ONE",
    "as_unit",
    "parse_rational",
    "format_rational",
    "mv_neg",
    "mv_disj",
    "mv_conj",
    "mv_imp",
    "mv_min",
    "mv_max",
    "mv_equiv",
    "mv_pow",
    "mv_nmul",
    "grid",
    "common_denominator",
]

_RATIONAL_RE = re.compile(r"\s*(\d+)\s*(?:/\s*(\d+)\s*)?$")


class UnitRational(Fraction):
    """A rational number in ``[0, 1]`` kept in lowest terms.

    Construction accepts the same arguments as :class:`fractions.Fraction`
    (so ``UnitRational(2, 4) == UnitRational(1, 2)``) but refuses values
    outside the unit interval instead of clamping them.
    """

    __slots__ = ()

    def __new__(cls, numerator=0, denominator=None):
        self = super().__new__(cls, numerator, denominator)
        if self < 0 or self > 1:
            raise ValueError(f"{Fraction(self)} is outside [0,1]")
        return self

    @property
    def num(self) -> int:
        return self.numerator

    @property
    def den(self) -> int:
        return self.denominator

    def __repr__(self):
        return f"UnitRational({format_rational(self)})"

    def __str__(self):
        return format_rational(self)


ZERO = UnitRational(0)
ONE = UnitRational(1)


def as_unit(x) -> UnitRational:
    if isinstance(x, UnitRational):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    return UnitRational(x)


def parse_rational(text: str) -> UnitRational:
    """Read ``p/q``, ``0`` or ``1`` (non-reduced input is reduced)."""
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational: {text!r}")
    p = int(m.group(1))
    q = int(m.group(2)) if m.group(2) is not None else 1
    if q == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return UnitRational(p, q)


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def mv_neg(x: UnitRational) -> UnitRational:
    return UnitRational(1 - x)


def mv_disj(x: UnitRational, y: UnitRational) -> UnitRational:
    """Strong disjunction: ``min(1, x + y)``."""
    return UnitRational(min(Fraction(1), x + y))


def mv_conj(x: UnitRational, y: UnitRational) -> UnitRational:
    """Strong conjunction (the Łukasiewicz t-norm): ``max(0, x + y - 1)``."""
    return UnitRational(max(Fraction(0), x + y - 1))


def mv_imp(x: UnitRational, y: UnitRational) -> UnitRational:
    """Residuum of the t-norm: ``min(1, 1 - x + y)``."""
    return UnitRational(min(Fraction(1), 1 - x + y))


def mv_min(x: UnitRational, y: UnitRational) -> UnitRational:
    return UnitRational(min(x, y))


def mv_max(x: UnitRational, y: UnitRational) -> UnitRational:
    return UnitRational(max(x, y))


def mv_equiv(x: UnitRational, y: UnitRational) -> UnitRational:
    return UnitRational(1 - abs(x - y))


def _check_power(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"iteration count must be an integer >= 1, got {n!r}")


def mv_pow(x: UnitRational, n: int) -> UnitRational:
    """``x ⊙ ... ⊙ x`` with ``n`` occurrences of ``x``."""
    _check_power(n)
    return UnitRational(max(Fraction(0), n * x - (n - 1)))


def mv_nmul(x: UnitRational, n: int) -> UnitRational:
    """``x ⊕ ... ⊕ x`` with ``n`` occurrences of ``x``."""
    _check_power(n)
    return UnitRational(min(Fraction(1), n * x))


def grid(n: int) -> list[UnitRational]:
    """The carrier ``{0, 1/n, ..., 1}`` of the finite subalgebra Ł_n."""
    if n < 1:
        raise ValueError("grid denominator must be positive")
    return [UnitRational(k, n) for k in range(n + 1)]


def common_denominator(values) -> int:
    return reduce(lcm, (Fraction(v).denominator for v in values), 1)
