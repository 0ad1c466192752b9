from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from saym.symfield import ONE, ZERO, Coeff, I, as_coeff, param


def test_imaginary_unit_squares_to_minus_one():
    assert I * I == Coeff.const(-1)
    assert I**4 == ONE
    assert (I**3) == -I


def test_inverse_of_monomials():
    c = param("xi", 2) * I * Fraction(3, 4)
    assert c * c.inverse() == ONE
    assert (1 / I) == -I


def test_inverse_of_sum_is_refused():
    with pytest.raises(ZeroDivisionError):
        (ONE + param("xi")).inverse()


def test_subs_and_evaluate():
    c = param("xi", -1) * 2 + param("g") * I
    assert c.subs({"xi": 4}) == Coeff.const(Fraction(1, 2)) + param("g") * I
    assert c.evaluate({"xi": 2.0, "g": 3.0}) == pytest.approx(1 + 3j)
    with pytest.raises(KeyError):
        c.evaluate({"xi": 1.0})


def test_complex_conversion_and_display():
    assert as_coeff(2 - 1j) == Coeff.const(2) - I
    assert str(ZERO) == "0"
    assert str(param("g") * -1) == "-g"


def test_by_param_power_splits():
    c = param("s", 2) * param("g") + param("s", 0) * 3
    split = c.by_param_power("s")
    assert split[2] == param("g")
    assert split[0] == Coeff.const(3)


small = st.fractions(min_value=-5, max_value=5, max_denominator=5)


@st.composite
def coeffs(draw):
    out = ZERO
    for _ in range(draw(st.integers(0, 3))):
        term = Coeff.const(draw(small))
        for name in draw(st.lists(st.sampled_from(["xi", "g", "i"]), max_size=3)):
            term = term * param(name, draw(st.integers(-2, 2)))
        out = out + term
    return out


@given(coeffs(), coeffs(), coeffs())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == ZERO


@given(coeffs())
def test_evaluate_is_a_homomorphism(a):
    vals = {"xi": 1.7, "g": -0.3}
    b = a * a + a
    assert b.evaluate(vals) == pytest.approx(a.evaluate(vals) ** 2 + a.evaluate(vals))
