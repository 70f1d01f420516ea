"""Exact quadratic-field scalars: arithmetic, ordering, formatting."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from circlespec import LAMBDA2, Surd, format_surd

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def test_lambda2_satisfies_its_minimal_polynomial():
    # lambda^2 + lambda/3 - 1/3 = 0, exactly in Q(sqrt(13))
    val = LAMBDA2 * LAMBDA2 + LAMBDA2 * Fraction(1, 3) - Fraction(1, 3)
    assert val == 0
    assert float(LAMBDA2) == pytest.approx(-(1 + 13 ** 0.5) / 6, abs=1e-15)


def test_conjugate_root_and_vieta():
    other = LAMBDA2.conjugate()
    assert LAMBDA2 + other == Fraction(-1, 3)
    assert LAMBDA2 * other == Fraction(-1, 3)
    assert other.sign() > 0 > LAMBDA2.sign()


def test_sign_is_exact_near_zero():
    # 18/5 < sqrt(13) < 361/100, margins ~ 5e-3: float-safe but exactness
    # is the point
    assert Surd(Fraction(18, 5), -1).sign() < 0
    assert Surd(Fraction(361, 100), -1).sign() > 0
    assert Surd(0, 0).sign() == 0


def test_rational_detection():
    r = Surd(Fraction(2, 3), 0)
    assert r.is_rational()
    assert r.as_fraction() == Fraction(2, 3)
    assert not LAMBDA2.is_rational()
    with pytest.raises(ValueError):
        LAMBDA2.as_fraction()


def test_immutable():
    with pytest.raises(AttributeError):
        LAMBDA2.a = Fraction(0)


def test_mixed_radicals_rejected():
    with pytest.raises(ValueError):
        Surd(0, 1, 13) + Surd(0, 1, 2)
    with pytest.raises(ValueError):
        Surd(1)  # d must be a non-square > 1 even when unused
        Surd(1, 1, 4)


def test_format_strings():
    assert format_surd(LAMBDA2) == "(-1-sqrt(13))/6"
    assert format_surd(LAMBDA2.conjugate()) == "(-1+sqrt(13))/6"
    assert format_surd(Fraction(2, 3)) == "2/3"
    assert format_surd(Fraction(1)) == "1"
    assert format_surd(Surd(Fraction(3, 2), Fraction(1, 2))) == "(3+sqrt(13))/2"
    assert format_surd(Surd(Fraction(-5, 2), Fraction(-1, 2))) == "(-5-sqrt(13))/2"
    assert format_surd(Surd(0, 1)) == "sqrt(13)"


@given(a=fractions, b=fractions, c=fractions, d=fractions)
def test_field_axioms(a, b, c, d):
    x = Surd(a, b)
    y = Surd(c, d)
    assert x + y == y + x
    assert x * y == y * x
    assert x * (y + 1) == x * y + x
    assert (x - y) + y == x
    if y.sign() != 0:
        assert (x / y) * y == x


@given(a=fractions, b=fractions)
def test_float_matches_exact(a, b):
    x = Surd(a, b)
    expected = float(a) + float(b) * 13 ** 0.5
    assert float(x) == pytest.approx(expected, abs=1e-9)
    if x.sign() != 0:
        assert (float(x) > 0) == (x.sign() > 0)
