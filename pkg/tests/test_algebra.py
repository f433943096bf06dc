from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pavelka.algebra import (
    ONE,
    ZERO,
    UnitRational,
    as_unit,
    common_denominator,
    format_rational,
    grid,
    mv_conj,
    mv_disj,
    mv_equiv,
    mv_imp,
    mv_max,
    mv_min,
    mv_neg,
    mv_nmul,
    mv_pow,
    parse_rational,
)

U = UnitRational


def test_reduced_and_canonical():
    x = U(2, 4)
    assert (x.num, x.den) == (1, 2)
    assert x == U(1, 2) and hash(x) == hash(U(1, 2))
    assert U(-1, -3) == U(1, 3)


@pytest.mark.parametrize("args", [(3, 2), (-1, 2), (5, 4)])
def test_outside_unit_interval_rejected(args):
    with pytest.raises(ValueError):
        U(*args)


def test_zero_denominator_rejected():
    with pytest.raises(ZeroDivisionError):
        U(1, 0)
    with pytest.raises(ValueError):
        parse_rational("1/0")


@pytest.mark.parametrize("text,value", [("0", ZERO), ("1", ONE), ("2/3", U(2, 3)),
                                        ("4/8", U(1, 2)), (" 1 / 3 ", U(1, 3))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["", "a", "1/", "-1/2", "3/2", "1.5"])
def test_parse_rational_errors(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_format_rational():
    assert [format_rational(x) for x in (ZERO, ONE, U(5, 6))] == ["0", "1", "5/6"]


# Values below are worked out by hand.

def test_neg_examples():
    assert mv_neg(ZERO) == ONE
    assert mv_neg(U(1, 2)) == U(1, 2)
    assert mv_neg(U(1, 3)) == U(2, 3)


def test_disj_examples():
    assert mv_disj(ZERO, U(3, 7)) == U(3, 7)
    assert mv_disj(U(2, 3), U(2, 3)) == ONE
    assert mv_disj(U(1, 4), U(1, 3)) == U(7, 12)


def test_conj_examples():
    assert mv_conj(ONE, U(3, 7)) == U(3, 7)
    assert mv_conj(U(1, 2), U(1, 2)) == ZERO
    assert mv_conj(U(2, 3), U(2, 3)) == U(1, 3)


def test_imp_examples():
    assert mv_imp(U(2, 5), U(2, 5)) == ONE
    assert mv_imp(U(1, 2), U(1, 3)) == U(5, 6)
    assert mv_imp(U(1, 3), U(1, 2)) == ONE


def test_iterates_and_lattice():
    assert mv_pow(U(1, 2), 2) == ZERO
    assert mv_pow(U(3, 4), 2) == U(1, 2)
    assert mv_nmul(U(1, 3), 2) == U(2, 3)
    assert mv_nmul(U(1, 3), 4) == ONE
    assert mv_max(U(2, 9), ZERO) == U(2, 9)
    assert mv_min(U(2, 9), U(1, 9)) == U(1, 9)
    assert mv_equiv(U(1, 4), U(3, 4)) == U(1, 2)


@pytest.mark.parametrize("n", [0, -1])
def test_iteration_count_must_be_positive(n):
    with pytest.raises(ValueError):
        mv_pow(U(1, 2), n)
    with pytest.raises(ValueError):
        mv_nmul(U(1, 2), n)


def test_pow_matches_repeated_conj():
    for x in grid(12):
        acc = x
        for n in range(1, 6):
            assert mv_pow(x, n) == acc
            assert mv_nmul(x, n) == mv_neg(mv_pow(mv_neg(x), n))
            acc = mv_conj(acc, x)


def test_results_are_unit_rationals():
    for x, y in product(grid(6), repeat=2):
        for op in (mv_disj, mv_conj, mv_imp, mv_min, mv_max, mv_equiv):
            r = op(x, y)
            assert isinstance(r, UnitRational)


@given(st.integers(0, 50), st.integers(1, 50), st.integers(0, 50), st.integers(1, 50))
def test_ops_agree_with_fraction_formulas(a, b, c, d):
    if a > b or c > d:
        return
    x, y = U(a, b), U(c, d)
    fx, fy = Fraction(a, b), Fraction(c, d)
    assert mv_disj(x, y) == min(1, fx + fy)
    assert mv_conj(x, y) == max(0, fx + fy - 1)
    assert mv_imp(x, y) == min(1, 1 - fx + fy)


def test_grid_and_denominators():
    assert grid(1) == [ZERO, ONE]
    assert grid(3) == [ZERO, U(1, 3), U(2, 3), ONE]
    assert common_denominator([U(1, 2), U(1, 3), ONE]) == 6
    with pytest.raises(ValueError):
        grid(0)
    assert as_unit("1/2") == U(1, 2) and as_unit(1) == ONE
