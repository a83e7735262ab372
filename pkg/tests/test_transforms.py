import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pedalcurve.chain import (anticatacaustic, chain_from_polar_ode, chain_residual, chain_to_pedal,
                              evolute, inverse_evolute, inverse_evolute_shift, point_chain,
                              polar_ode_to_pedal)
from pedalcurve.curves import Sampler, catalog, curve_to_pedal_samples
from pedalcurve.errors import NotShiftable, NumericOnlyTransform
from pedalcurve.expr import ChainEquation, PedalEquation, PowerSum
from pedalcurve.mechanics import equation_residuals
from pedalcurve.parser import parse_pedal_equation, parse_pr_equation
from pedalcurve.problems import DarkParams, dark_equation, dark_rotating_closed_form
from pedalcurve.transforms import (apply_transform, compose, named_transform as T, parse_pipeline,
                                   pedal_transform, point_map, t_f_transform)

F = Fraction
KEPLER = parse_pedal_equation("1/p^2 = 2/r - 1")

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)
nonzero = small.filter(lambda x: x != 0)
positive = st.fractions(min_value=F(1, 4), max_value=4, max_denominator=4)
int_sums = st.dictionaries(st.integers(-3, 3), small, min_size=1, max_size=4).map(PowerSum)


@st.composite
def equations(draw, max_degree=2):
    d = draw(st.integers(1, max_degree))
    cs = [draw(int_sums) for _ in range(d)]
    cs.append(draw(int_sums.filter(lambda s: len(s) > 0)))
    return PedalEquation(cs)


def same(a: PedalEquation, b: PedalEquation):
    assert a.primitive() == b.primitive(), f"{a.render()}  !=  {b.render()}"


def apply(pipe, e):
    return apply_transform(compose(pipe) if isinstance(pipe, list) else pipe, e)


# ---------------------------------------------------------------- worked examples

def test_harmonic_on_kepler():
    assert apply(T("H", 2), KEPLER).render() == "4/p^2 = 2/r - 1 + 3/r^2"


def test_identity_scaling():
    e = parse_pedal_equation("1/p^2 = 2/r - 1 + r^3")
    assert apply(T("S", 1), e) == e


def test_dual_parallel_straightens_kepler():
    L, M, c = F(3, 2), F(2), F(-1, 3)
    e = parse_pedal_equation("L^2/p^2 = 2*M/r + c", {"L": L, "M": M, "c": c})
    line = apply(T("Estar", -M / L ** 2), e)
    same(line, PedalEquation([PowerSum.const(-(M * M / L ** 2 + c)), PowerSum.const(L * L)]))


def test_rotating_frame_substitution():
    dp = DarkParams.from_omega(F(3), F(1, 2), F(-2, 3), F(5, 4), F(-7, 2))
    w = dp.omega / dp.L
    same(apply(T("A", w), dark_equation(dp)), dark_rotating_closed_form(dp))


def test_inversion_of_kepler():
    e = apply(T("I", 1), KEPLER)
    same(e, parse_pedal_equation("r^4/p^2 = 2*r - 1"))


def test_inversion_of_kepler_sampled():
    # the inverted ellipse, sampled geometrically, satisfies the transformed equation
    ell = _ellipse()
    s = _mapped(ell, lambda x, y: (x / (x * x + y * y), y / (x * x + y * y)))
    r, p = curve_to_pedal_samples(s, n=300)
    assert np.max(equation_residuals(apply(T("I", 1), KEPLER_HALF), r, p)) < 1e-9


def test_pipeline_text_parses_rightmost_first():
    t = parse_pipeline("H(2) * Estar(-1/2) * S(3)")
    assert [s.tag for s in t.steps] == ["H", "Estar", "S"]
    manual = apply(T("H", 2), apply(T("Estar", F(-1, 2)), apply(T("S", 3), KEPLER)))
    assert apply(t, KEPLER) == manual


def test_dual_is_inversion_after_pedal():
    e = parse_pedal_equation("1/p^2 = 2/r - 1/3")
    for R in (1, F(5, 2)):
        same(apply(T("Dual", R), e), apply([T("I", R), T("P")], e))


def test_parallel_curve_is_numeric_only():
    with pytest.raises(NumericOnlyTransform):
        apply(T("Epar", 1), KEPLER)


# ---------------------------------------------------------------- pedal transform

def test_pedal_of_circle_involute_is_archimedes():
    a = 2
    e = pedal_transform(parse_pr_equation("p^2 = r^2 - 4"))
    same(e, parse_pedal_equation("r^4/p^2 = r^2 + a^2", {"a": a}))


def test_pedal_of_circle_through_pole_is_cardioid():
    e = pedal_transform(parse_pr_equation("2*3*p = r^2"))
    same(e, parse_pedal_equation("2*3*p^2 = r^3"))


@pytest.mark.parametrize("R", [1, F(3, 2), 4])
def test_inverse_pedal_equals_conjugated_pedal_on_circles(R):
    for circle in ("2*2*p = r^2 + 4 - 1/4", "2*p = r^2", "p = 3"):
        e = parse_pedal_equation(circle)
        same(apply(T("Pinv"), e), apply([T("I", R), T("P"), T("I", R)], e))


# ---------------------------------------------------------------- nonlocal transform

@given(nonzero)
@settings(max_examples=30)
def test_tf_identity_is_harmonic(k):
    assert t_f_transform(KEPLER, ("power", 1, 1), k) == apply(T("H", k), KEPLER)


@pytest.mark.parametrize("a, b, k", [(F(3, 2), F(1, 3), F(5, 2)), (F(1, 2), F(-2), F(1, 3)), (2, F(1, 7), -1)])
def test_moebius_revolving_map_decomposes(a, b, k):
    e = parse_pedal_equation("3/p^2 = 2/r - 1/2")
    # the revolving-orbit map r -> ar/(1-br), phi -> phi/k is T_f with angle factor k/a
    mapped = t_f_transform(e, ("moebius", a, b), F(k) / a)
    assert mapped.same_curve(apply([T("H", k), T("Estar", b), T("S", a)], e))
    assert t_f_transform(e, ("moebius", a, b), k).same_curve(apply([T("H", k * a), T("Estar", b), T("S", a)], e))


# ---------------------------------------------------------------- identity suite

@given(equations(), nonzero, nonzero)
@settings(max_examples=100, deadline=None)
def test_harmonics_compose(e, k, l):
    same(apply([T("H", k), T("H", l)], e), apply(T("H", k * l), e))


@given(equations())
@settings(max_examples=50, deadline=None)
def test_trivial_harmonics(e):
    same(apply(T("H", 1), e), e)
    same(apply(T("H", -1), e), e)


@given(equations(), nonzero, nonzero)
@settings(max_examples=100, deadline=None)
def test_complex_powers_compose(e, a, b):
    same(apply([T("M", a), T("M", b)], e), apply(T("M", a * b), e))


@given(equations())
@settings(max_examples=50, deadline=None)
def test_power_minus_one_is_unit_inversion(e):
    same(apply(T("M", -1), e), apply(T("I", 1), e))


@given(equations(), positive)
@settings(max_examples=100, deadline=None)
def test_inversion_is_involution(e, R):
    same(apply([T("I", R), T("I", R)], e), e)


@given(equations(), positive, positive)
@settings(max_examples=50, deadline=None)
def test_scalings_compose(e, a, b):
    same(apply([T("S", a), T("S", b)], e), apply(T("S", a * b), e))


@given(equations(), nonzero, positive)
@settings(max_examples=100, deadline=None)
def test_harmonic_commutes_with_inversion(e, k, R):
    same(apply([T("H", k), T("I", R)], e), apply([T("I", R), T("H", k)], e))


# ---------------------------------------------------------------- pointwise identities

def _circle_samples():
    entry = catalog("circle_offset", R=2, a=0.7)
    return curve_to_pedal_samples(entry.sampler, t=entry.sampler.grid(400))


def _close(a, b, tol=1e-8):
    return max(np.max(np.abs(a[0] - b[0])), np.max(np.abs(a[1] - b[1]))) < tol


@pytest.mark.parametrize("c", [-0.4, 0.3, 1.1])
def test_unit_parallel_shift_is_conjugated_parallel(c):
    r, p = _circle_samples()
    assert _close(point_map(T("F", c), r, p), point_map(compose([T("P"), T("Epar", c), T("Pinv")]), r, p))


@pytest.mark.parametrize("c", [-0.2, 0.3])
def test_dual_parallel_pointwise(c):
    r, p = _circle_samples()
    lhs = point_map(T("Estar", c), r, p)
    assert _close(lhs, point_map(compose([T("Dual", 1), T("Epar", c), T("Dual", 1)]), r, p))
    assert _close(lhs, point_map(compose([T("I", 1), T("F", c), T("I", 1)]), r, p))


@pytest.mark.parametrize("R", [1.0, 2.5])
def test_inverse_pedal_pointwise(R):
    r, p = _circle_samples()
    assert _close(point_map(T("Pinv"), r, p), point_map(compose([T("I", R), T("P"), T("I", R)]), r, p))


# ---------------------------------------------------------------- geometric oracle
# Each transform is realized directly on the plane curve (scaling, inversion,
# angle multiplication, complex power, pedal construction) and the mapped
# samples must satisfy the equation produced by the substitution rule.

def _ellipse():
    e = 1 / math.sqrt(2)

    def point(phi):
        phi = np.asarray(phi, dtype=float)
        r = 1 / (1 + e * np.cos(phi))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi)])

    return Sampler(point, (0.2, 1.3))


KEPLER_HALF = parse_pedal_equation("1/p^2 = 2/r - 1/2")


def _mapped(base, fn):
    def point(t):
        xy = base.point(t)
        return np.column_stack(fn(xy[:, 0], xy[:, 1]))
    return Sampler(point, base.t_range)


def _polar_mapped(base, fn):
    def point(t):
        xy = base.point(t)
        r, phi = fn(np.hypot(xy[:, 0], xy[:, 1]), np.arctan2(xy[:, 1], xy[:, 0]))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    return Sampler(point, base.t_range)


def _pedal_curve(base):
    # foot of the perpendicular from the origin to each tangent line
    def point(t):
        t = np.asarray(t, dtype=float)
        h = 1e-5
        x = base.point(t)
        d = base.point(t + h) - base.point(t - h)
        n = np.column_stack([-d[:, 1], d[:, 0]]) / np.hypot(d[:, 0], d[:, 1])[:, None]
        return n * np.sum(x * n, axis=1)[:, None]
    return Sampler(point, base.t_range)


@pytest.mark.parametrize("name, transform, realize", [
    ("S", T("S", F(3, 2)), lambda b: _mapped(b, lambda x, y: (x / 1.5, y / 1.5))),
    ("I", T("I", F(5, 2)), lambda b: _mapped(b, lambda x, y: (2.5 * x / (x * x + y * y), 2.5 * y / (x * x + y * y)))),
    ("H", T("H", 3), lambda b: _polar_mapped(b, lambda r, f: (r, 3 * f))),
    ("M", T("M", F(2, 3)), lambda b: _polar_mapped(b, lambda r, f: (r ** 1.5, 1.5 * f))),
    ("M-neg", T("M", F(-1, 2)), lambda b: _polar_mapped(b, lambda r, f: (r ** -2, -2 * f))),
    ("P", T("P"), _pedal_curve),
])
def test_rule_matches_geometric_construction(name, transform, realize):
    s = realize(_ellipse())
    t = np.linspace(0.3, 1.2, 200)
    r, p = curve_to_pedal_samples(s, t=t)
    res = equation_residuals(apply(transform, KEPLER_HALF), r, p)
    assert np.max(res) < 1e-7


@pytest.mark.parametrize("tag, param", [("S", 1.7), ("I", 2.0), ("H", 2.0), ("M", 0.5), ("Estar", 0.3),
                                        ("A", 0.2), ("B", -0.15), ("F", 0.4), ("P", None), ("Pinv", None)])
def test_point_map_lands_on_transformed_equation(tag, param):
    s = _ellipse()
    r, p = curve_to_pedal_samples(s, n=200)
    t = T(tag) if param is None else T(tag, F(param).limit_denominator(100))
    rn, pn = point_map(t, r, p)
    assert np.max(equation_residuals(apply(t, KEPLER_HALF), rn, pn)) < 1e-9


# ---------------------------------------------------------------- derivative chains

def test_ode_constant_slope_is_circle_involute():
    c = chain_from_polar_ode("abs(r1) = 3")
    assert c == ChainEquation.symbol(1) - ChainEquation.const(3)
    same(chain_to_pedal(c), parse_pedal_equation("p^2 = r^2 - 9"))


def test_ode_proportional_slope_is_log_spiral():
    c = chain_from_polar_ode("abs(r1) = 2*r")
    # |r'| = cot(alpha) r with cot(alpha) = 2: p = sin(alpha) r
    same(polar_ode_to_pedal(c), parse_pedal_equation("5*p^2 = r^2"))


def test_kepler_ode_chain():
    c = chain_from_polar_ode("r2 + r = 3")
    assert c == ChainEquation.symbol(2) + ChainEquation.symbol(0) - ChainEquation.const(3)


def test_evolute_shifts_indices():
    c = ChainEquation.symbol(1) - ChainEquation.const(F(5, 2))
    assert evolute(c) == ChainEquation.symbol(0) - ChainEquation.const(F(5, 2))
    with pytest.raises(NotShiftable):
        evolute(ChainEquation.symbol(0))


def test_involute_of_point_contrapedal():
    inv = inverse_evolute(ChainEquation.symbol(1))
    # p_c p_c' = 0 integrates to p_c = const
    assert inv.shifted == ChainEquation.symbol(2)
    assert inv.integrated is not None


def test_evolute_undoes_inverse_evolute():
    for c in (ChainEquation.symbol(1) * 2 - ChainEquation.const(3),
              ChainEquation.symbol(0) ** 2 + ChainEquation.symbol(1) - ChainEquation.const(1)):
        assert evolute(inverse_evolute_shift(c)) == c


@pytest.mark.parametrize("a, R", [(2, F(5, 2)), (1, 3), (F(1, 2), F(7, 4))])
def test_anticatacaustic_of_point_is_conic(a, R):
    e = anticatacaustic(point_chain(a), constant=2 * R)
    same(e, parse_pedal_equation("(R^2 - a^2/4)/p^2 = 2*R/r - 1", {"R": R, "a": a}))


def test_chain_residual_on_circle_involute():
    # p_c = a: p_c^2 = a^2 as a function of p
    a = 1.5
    c = ChainEquation.symbol(1) ** 2 - ChainEquation.const(a * a)
    assert chain_residual(c, PowerSum.const(a * a), [0.1, 0.7, 2.0]) < 1e-12
