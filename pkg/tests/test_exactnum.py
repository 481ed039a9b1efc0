from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from hypglue.exactnum import (
    ONE, SQRT14, SQRT2, SQRT7, ZERO, FieldElement, as_field, field_arith, field_sign,
    is_square_rational,
)

mpmath.mp.dps = 80

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=40)
elements = st.builds(FieldElement, rationals, rationals, rationals, rationals)
nonzero = elements.filter(bool)


def high_precision(x: FieldElement) -> mpmath.mpf:
    a, b, c, d = (mpmath.mpf(q.numerator) / q.denominator for q in x.coords)
    return a + b * mpmath.sqrt(2) + c * mpmath.sqrt(7) + d * mpmath.sqrt(14)


@given(elements, elements, elements)
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == ZERO
    assert x * ONE == x


@given(nonzero)
def test_inverse(x):
    assert x * x.inverse() == ONE
    assert x / x == ONE


@given(elements)
def test_norm_is_rational_product_of_conjugates(x):
    prod = x
    for s2, s7 in ((-1, 1), (1, -1), (-1, -1)):
        prod = prod * x.conjugate(s2, s7)
    assert prod.is_rational()
    assert prod.to_fraction() == x.norm()


@settings(max_examples=400)
@given(elements)
def test_sign_matches_mpmath(x):
    ref = high_precision(x)
    want = 0 if ref == 0 else (1 if ref > 0 else -1)
    assert x.sign() == want


@pytest.mark.parametrize("x", [
    FieldElement(99, -70),                 # 99 - 70√2, about 0.005
    FieldElement(-99, 70),
    FieldElement(0, 0, 8, -3) * FieldElement(0, 0, 8, 3),
    SQRT14 - SQRT2 * SQRT7,
    FieldElement(127, 0, -48),             # 127 - 48√7, about 0.0039
    FieldElement(0, 1351, 0, -511),        # √2 (1351 - 511√7)
])
def test_sign_near_cancellation(x):
    ref = high_precision(x)
    assert x.sign() == (0 if abs(ref) < mpmath.mpf(10) ** -60 else (1 if ref > 0 else -1))


def test_square_roots_multiply():
    assert SQRT2 * SQRT2 == 2
    assert SQRT7 * SQRT7 == 7
    assert SQRT2 * SQRT7 == SQRT14
    assert SQRT14 * SQRT14 == 14


@given(elements, elements)
def test_order_is_consistent_with_sign(x, y):
    assert (x < y) == ((y - x).sign() > 0)
    assert (x == y) == ((x - y).sign() == 0)


@given(elements)
def test_text_roundtrip(x):
    assert FieldElement.from_text(x.to_text()) == x
    assert hash(FieldElement.from_text(x.to_text())) == hash(x)


def test_rational_interop():
    assert FieldElement(Fraction(1, 2)) == Fraction(1, 2)
    assert hash(FieldElement(3)) == hash(FieldElement(Fraction(6, 2)))
    assert 1 - SQRT2 == FieldElement(1, -1)
    assert 1 / SQRT2 == FieldElement(0, Fraction(1, 2))
    assert str(FieldElement(0, 0, Fraction(-1, 2))) == "-1/2√7"


def test_helpers():
    assert field_arith(2, SQRT2, "mul") == FieldElement(0, 2)
    assert field_sign(FieldElement(1, -1)) == -1
    assert as_field(Fraction(3, 4)) == FieldElement(Fraction(3, 4))
    with pytest.raises(ValueError):
        field_arith(1, 2, "pow")
    with pytest.raises(TypeError):
        as_field("1")
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO
    assert is_square_rational(Fraction(9, 4)) == Fraction(3, 2)
    assert is_square_rational(2) is None
    assert is_square_rational(-4) is None
