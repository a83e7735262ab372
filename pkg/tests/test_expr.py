from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pedalcurve.errors import ExprSyntaxError, NonIntegerExponent, PedalError
from pedalcurve.expr import (PedalEquation, PowerSum, canonicalize, ps_arith, ps_eval,
                             ps_substitute_moebius, ps_substitute_power)
from pedalcurve.parser import parse_pedal_equation, parse_power_sum

F = Fraction

exponents = st.fractions(min_value=-4, max_value=4, max_denominator=3)
coeffs = st.fractions(min_value=-9, max_value=9, max_denominator=7)
power_sums = st.dictionaries(exponents, coeffs, max_size=5).map(PowerSum)


# ---------------------------------------------------------------- parsing

def test_parse_simple_sum():
    assert parse_power_sum("2/r - 1") == PowerSum({-1: 2, 0: -1})


def test_parse_merges_terms():
    assert parse_power_sum("r^2 + r^2") == PowerSum({2: 2})


def test_parse_decimal_coefficient():
    assert parse_power_sum("1/r^2 + 0.25/r^4") == PowerSum({-2: 1, -4: F(1, 4)})


def test_parse_rational_exponent():
    assert parse_power_sum("2/s^(1/2)", var="s") == PowerSum({F(-1, 2): 2})


def test_parse_kepler_with_constants():
    e = parse_pedal_equation("L^2/p^2 = 2*M/r + c", {"L": 2, "M": 1, "c": -1})
    assert e.degree == 1
    assert e.same_curve(PedalEquation([PowerSum({-1: -2, 0: 1}), PowerSum.const(4)]))


def test_parse_offset_circle_squares_to_q_form():
    e = parse_pedal_equation("2*R*p = r^2 + R^2 - a^2", {"R": 2, "a": F(7, 10)})
    # (r^2 + R^2 - a^2)^2 q = 4 R^2
    n1 = PowerSum({0: F(351, 100), 2: 1}) ** 2
    assert e.degree == 1
    assert e.same_curve(PedalEquation([PowerSum.const(-16), n1]))


def test_parse_concentric_circle():
    e = parse_pedal_equation("p = r")
    assert e.same_curve(PedalEquation([PowerSum.const(-1), PowerSum({2: 1})]))


@pytest.mark.parametrize("text", ["1/p^2 = ", "1/p^2 = 2/r -", "r^x = 1", "1/p^2 = (2/r", "1/p^2 == r"])
def test_syntax_errors(text):
    with pytest.raises(PedalError):
        parse_pedal_equation(text)


def test_syntax_error_reports_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse_pedal_equation("1/p^2 = 2/r +* 1")
    assert info.value.position is not None


# ---------------------------------------------------------------- arithmetic

def test_add_example():
    assert ps_arith("add", PowerSum({-1: 2}), PowerSum({0: -1})) == PowerSum({-1: 2, 0: -1})


def test_mul_difference_of_squares():
    assert ps_arith("mul", PowerSum({1: 1, 0: 1}), PowerSum({1: 1, 0: -1})) == PowerSum({2: 1, 0: -1})


def test_pow_int_rotating_frame_factor():
    w = F(1, 3)
    assert ps_arith("pow_int", PowerSum({2: w, 0: 1}), 2) == PowerSum({4: w * w, 2: 2 * w, 0: 1})


def test_zero_is_empty():
    assert len(PowerSum({1: 2}) - PowerSum({1: 2})) == 0


def test_tiny_float_terms_dropped():
    s = PowerSum({0: 1.0, 1: 1e-15})
    assert list(s.exponents()) == [F(0)]


@pytest.mark.parametrize("ps, r, expected", [
    (PowerSum({-1: 2, 0: -1}), 2.0, 0.0),
    (PowerSum({-2: 1, -4: 1}), 1.0, 2.0),
])
def test_eval(ps, r, expected):
    assert ps_eval(ps, r) == pytest.approx(expected, abs=1e-15)


def test_eval_archimedes_rhs_matches_sampled_spiral():
    import numpy as np
    a = 0.7
    ps = PowerSum({-2: 1, -4: a * a})
    # r = a phi at r = a: phi = 1, p = r^2 / sqrt(r^2 + a^2)
    r = a
    p = r * r / np.hypot(r, a)
    assert ps_eval(ps, r) == pytest.approx(1 / p ** 2, rel=1e-14)
    assert ps_eval(ps, r) == pytest.approx(2 / a ** 2, rel=1e-14)


def test_substitute_power_examples():
    assert ps_substitute_power(PowerSum({-1: 2, 0: -1}), 1, -1) == PowerSum({1: 2, 0: -1})
    assert ps_substitute_power(PowerSum({-1: 2}), 1, 2) == PowerSum({-2: 2})
    assert ps_substitute_power(PowerSum({2: 1}), 3, 1) == PowerSum({2: 9})


def test_substitute_moebius_examples():
    c = F(2, 5)
    num, den = ps_substitute_moebius(PowerSum({-1: 2}), 1, c)
    # 2(1 - cr)/r as a fraction with the r^-1 kept in the numerator
    assert num * PowerSum({1: 1}) == PowerSum({0: 2, 1: -2 * c}) * den
    num, den = ps_substitute_moebius(PowerSum({0: 1}), 3, c)
    assert num == PowerSum.const(1) and den == PowerSum.const(1)
    with pytest.raises(NonIntegerExponent):
        ps_substitute_moebius(PowerSum({F(-1, 2): 1}), 1, c)


# ---------------------------------------------------------------- properties

@given(power_sums, power_sums, power_sums)
def test_add_mul_commutative_associative(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)


@given(power_sums, power_sums, st.sampled_from([0.5, 1.0, 2.0]))
def test_eval_is_multiplicative(a, b, r):
    lhs = ps_eval(a * b, r)
    rhs = ps_eval(a, r) * ps_eval(b, r)
    # compare against the size of the products that cancel
    scale = sum(abs(float(k1 * k2)) * r ** float(e1 + e2) for e1, k1 in a.items() for e2, k2 in b.items())
    assert abs(lhs - rhs) <= 1e-12 * max(scale, 1e-300)


@given(power_sums)
def test_render_parse_round_trip(a):
    once = parse_power_sum(a.render()) if len(a) else a
    assert once == a
    if len(a):
        assert parse_power_sum(once.render()) == once


@given(st.lists(power_sums, min_size=1, max_size=3))
@settings(max_examples=80)
def test_canonical_form_idempotent(cs):
    cs = list(cs) + [PowerSum({1: 1, 0: 1})]
    e = PedalEquation(cs)
    assert canonicalize(canonicalize(e)) == canonicalize(e)
    assert min(c.min_exponent() for c in e.coeffs if len(c)) == 0
    assert not e.coeffs[-1].is_zero()


@given(st.lists(power_sums, min_size=1, max_size=3))
@settings(max_examples=60)
def test_equation_render_parse_round_trip(cs):
    cs = list(cs) + [PowerSum({1: 1, 0: 2})]
    e = PedalEquation(cs)
    back = parse_pedal_equation(e.render())
    assert back.same_curve(e)


def test_power_binds_tighter_than_division():
    assert parse_power_sum("r^2/4") == PowerSum({2: F(1, 4)})
    assert parse_power_sum("r^(1/2)") == PowerSum({F(1, 2): 1})
    assert parse_power_sum("r^(-3/2)") == PowerSum({F(-3, 2): 1})
