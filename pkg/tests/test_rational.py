import random

import pytest
from hypothesis import given, strategies as st

from exactrnn.rational import PrecisionReport, Rational, precision_of, rat_cmp

rationals = st.builds(
    Rational,
    st.integers(min_value=-50, max_value=50),
    st.integers(min_value=1, max_value=50),
)


def test_gcd_reduction():
    assert Rational(2, 4) == Rational(1, 2)
    assert str(Rational(2, 4)) == "1/2"


def test_addition_small():
    assert Rational(1, 2) + Rational(1, 3) == Rational(5, 6)


def test_multiplicative_inverse():
    assert Rational(3, 7) * Rational(7, 3) == Rational(1)
    assert str(Rational(3, 7) * Rational(7, 3)) == "1/1"


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Rational(1, 2) / Rational(0)
    with pytest.raises(ZeroDivisionError):
        Rational(1, 0)


def test_negative_denominator_normalized():
    q = Rational(3, -6)
    assert q.num == -1 and q.den == 2


def test_comparisons_and_hash():
    assert Rational(1, 2) < Rational(2, 3)
    assert rat_cmp(Rational(1, 2), Rational(2, 4)) == 0
    assert hash(Rational(2, 4)) == hash(Rational(1, 2))
    assert Rational(3) == 3 and Rational(1, 2) != 1


def test_parse_round_trip():
    for text in ("0/1", "-7/3", "22/7", "5/1"):
        assert str(Rational.parse(text)) == text


@given(rationals, rationals, rationals)
def test_semiring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + Rational(0) == a
    assert a * Rational(1) == a


def test_semiring_laws_bulk():
    rng = random.Random(0)
    for _ in range(1000):
        a, b, c = (
            Rational(rng.randint(-99, 99), rng.randint(1, 99)) for _ in range(3)
        )
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c


@given(rationals, rationals)
def test_canonical_outputs(a, b):
    from math import gcd

    for q in (a + b, a - b, a * b, -a):
        assert q.den > 0
        assert gcd(abs(q.num), q.den) == 1
        if q.num == 0:
            assert q.den == 1


def test_precision_zero_is_one_bit():
    assert precision_of([Rational(0)]) == PrecisionReport(1, 1)


def test_precision_direct_count():
    # 1/2 -> 1 + 2 bits, 3/1 -> 2 + 1 bits
    report = precision_of([Rational(1, 2), Rational(3)])
    assert report.max_value_bits == 3
    assert report.total_bits == 6


def test_precision_invariant():
    report = precision_of([Rational(5, 3), Rational(0), Rational(-9)])
    assert report.max_value_bits <= report.total_bits


def test_immutability():
    q = Rational(1, 2)
    with pytest.raises(AttributeError):
        q.num = 3
