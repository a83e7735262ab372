"""Two worked force problems: relativistic Kepler orbits and the dark Kepler problem.

Relativistic Kepler: 1/p^2 = d + r_s/(a^2 r) + r_s/r^3 with d = 1/b^2 - 1/a^2.
A dual parallel transform E*_gamma turns it into an alpha = 1/2 elliptic
spiral.

Dark Kepler: L^2/p^2 = 2M/r + 2Fr - omega^2 r^2 + c. In the frame rotating
with angular velocity omega/L it matches a Cartesian oval when FL + omega M = 0,
and the transforms E*_alpha B_alpha move any parameter set onto that surface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import InvalidParam, NoOvalSolution, NoRealMu, ZeroAngularMomentum
from .expr import PedalEquation, PowerSum, coerce, cpow, is_exact
from .mechanics import RegionReport, allowed_region
from .spirals import EllipticTriple, classify_spiral
from .transforms import apply_transform, compose, named_transform


def _num(x):
    return coerce(x)


def _sqrt(x):
    """Exact square root when x is a rational square, else float."""
    if is_exact(x) and x >= 0:
        return cpow(x, Fraction(1, 2))
    return math.sqrt(float(x))


def _rel(a, b) -> float:
    a, b = float(a), float(b)
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------------------- relativistic Kepler

@dataclass(frozen=True)
class SchwarzschildParams:
    r_s: object
    a: object
    b: object

    def __post_init__(self):
        for name in ("r_s", "a", "b"):
            v = _num(getattr(self, name))
            if not v > 0:
                raise InvalidParam(f"{name} must be positive")
            object.__setattr__(self, name, v)

    @property
    def d(self):
        return 1 / (self.b * self.b) - 1 / (self.a * self.a)


def schwarzschild_equation(sp: SchwarzschildParams) -> Tuple[PedalEquation, RegionReport]:
    """Pedal equation of the orbits and the region report of h(r) = d r^3 + (r_s/a^2) r^2 - r + r_s."""
    rhs = PowerSum({0: sp.d, -1: sp.r_s / (sp.a * sp.a), -3: sp.r_s})
    e = PedalEquation([-rhs, PowerSum.const(1)])
    return e, allowed_region(e)


def h_polynomial(sp: SchwarzschildParams) -> List:
    """Ascending coefficients (r_s, -1, r_s/a^2, d)."""
    return [sp.r_s, _num(-1), sp.r_s / (sp.a * sp.a), sp.d]


def tilde_coefficients(sp: SchwarzschildParams, gamma) -> Dict[str, object]:
    g = _num(gamma)
    rs, a2 = sp.r_s, sp.a * sp.a
    return {
        "a": sp.d - g * rs / a2 - g * g - g ** 3 * rs,
        "b": rs / a2 + 2 * g + 3 * rs * g * g,
        "d": -3 * g * rs,
        "r_s": rs,
    }


def tilde_equation(sp: SchwarzschildParams, gamma, drop_constant: bool = False) -> PedalEquation:
    t = tilde_coefficients(sp, gamma)
    rhs = PowerSum({-1: t["b"], -2: t["d"], -3: t["r_s"]})
    if not drop_constant:
        rhs = rhs + PowerSum.const(t["a"])
    return PedalEquation([-rhs, PowerSum.const(1)])


@dataclass
class SchwarzschildReduction:
    gamma: object
    reduced: PedalEquation
    triple: EllipticTriple
    family: str
    tilde: Dict[str, object] = field(default_factory=dict)

    def to_dict(self):
        return {"gamma": float(self.gamma), "reduced_equation": self.reduced.render(), "family": self.family,
                "triple": {"a": float(self.triple.a), "beta": float(self.triple.beta),
                           "gamma": float(self.triple.gamma), "alpha": str(self.triple.alpha)}}


def reduction_gamma(sp: SchwarzschildParams):
    """Smallest-magnitude real root of r_s g^3 + g^2 + (r_s/a^2) g - d = 0."""
    if sp.d == 0:
        return Fraction(0) if is_exact(sp.d) else 0.0
    coeffs = [float(sp.r_s), 1.0, float(sp.r_s / (sp.a * sp.a)), -float(sp.d)]
    roots = np.roots(coeffs)
    real = [z.real for z in roots if abs(z.imag) <= 1e-9 * max(1.0, abs(z))]
    g = min(real, key=abs)
    # polish on the cubic
    for _ in range(3):
        f = np.polyval(coeffs, g)
        df = np.polyval(np.polyder(coeffs), g)
        if df == 0:
            break
        g -= f / df
    return float(g)


def schwarzschild_reduce(sp: SchwarzschildParams) -> SchwarzschildReduction:
    """gamma with a~ = 0 and the reduced equation 1/p^2 = b~/r + d~/r^2 + r_s/r^3."""
    gamma = reduction_gamma(sp)
    reduced = tilde_equation(sp, gamma, drop_constant=True)
    t = tilde_coefficients(sp, gamma)
    triple = EllipticTriple(t["d"], t["b"], t["r_s"], Fraction(1, 2))
    try:
        family = classify_spiral(triple)
    except Exception as exc:  # NoCurve is reported, not raised
        family = type(exc).__name__
    return SchwarzschildReduction(gamma, reduced, triple, family, t)


def dual_parallel(e: PedalEquation, gamma) -> PedalEquation:
    return apply_transform(named_transform("Estar", gamma), e)


# ---------------------------------------------------------------- dark Kepler

@dataclass(frozen=True)
class DarkParams:
    """Dark Kepler data; omega2 is the squared dark-matter frequency.

    ``omega_sign`` picks the rotation direction for the rotating frame.
    """

    M: object
    F: object
    omega2: object
    L: object
    c: object
    omega_sign: int = -1

    def __post_init__(self):
        for name in ("M", "F", "omega2", "L", "c"):
            object.__setattr__(self, name, _num(getattr(self, name)))
        if self.omega_sign not in (1, -1):
            raise InvalidParam("omega_sign must be +1 or -1")
        if self.M == 0 and self.F == 0 and self.omega2 == 0 and self.L == 0:
            raise InvalidParam("L, M, F and omega cannot all vanish")

    @classmethod
    def from_omega(cls, M, F, omega, L, c):
        w = _num(omega)
        return cls(M, F, w * w, L, c, -1 if w <= 0 else 1)

    @property
    def omega(self):
        if self.omega2 < 0:
            raise InvalidParam("omega^2 < 0 has no real rotating frame")
        return self.omega_sign * _sqrt(self.omega2)


def _check_L(dp: DarkParams):
    if dp.L == 0:
        raise ZeroAngularMomentum("L = 0: the orbit is a line segment ending at the origin (p = 0)")


def dark_equation(dp: DarkParams) -> PedalEquation:
    """L^2/p^2 = 2M/r + 2F r - omega^2 r^2 + c."""
    _check_L(dp)
    rhs = PowerSum({-1: 2 * dp.M, 1: 2 * dp.F, 2: -dp.omega2, 0: dp.c})
    return PedalEquation([-rhs, PowerSum.const(dp.L * dp.L)])


def dark_rotating(dp: DarkParams) -> PedalEquation:
    """The dark equation seen from the frame rotating with angular velocity omega/L."""
    _check_L(dp)
    return apply_transform(named_transform("A", dp.omega / dp.L), dark_equation(dp))


def dark_rotating_closed_form(dp: DarkParams) -> PedalEquation:
    """(L + omega r^2)^2/p^2 = 2M/r + 2F r + c + 2 omega L."""
    _check_L(dp)
    w = dp.omega
    lhs = PowerSum({0: dp.L, 2: w}) ** 2
    rhs = PowerSum({-1: 2 * dp.M, 1: 2 * dp.F, 0: dp.c + 2 * w * dp.L})
    return PedalEquation([-rhs, lhs])


@dataclass
class OvalParams:
    alpha2: object
    C: object
    b2: object
    mu: object
    a2: Optional[object] = None
    kind: str = "oval"
    omega: object = 0
    residuals: Tuple[float, ...] = ()
    realizable: bool = True

    def to_dict(self):
        f = lambda x: None if x is None else float(x)  # noqa: E731
        return {"alpha2": f(self.alpha2), "C": f(self.C), "b2": f(self.b2), "mu": f(self.mu),
                "a2": f(self.a2), "kind": self.kind, "realizable": bool(self.realizable)}


def matching_residuals(dp: DarkParams, ov: OvalParams, omega=None) -> Tuple[float, ...]:
    """Relative residuals of the five oval-matching equations."""
    w = ov.omega if omega is None else omega
    k = 1 - ov.alpha2
    mu = ov.mu
    pairs = [
        (2 * dp.L, ov.b2 * mu),
        (2 * w, -k * mu),
        (2 * dp.M, ov.C * ov.b2 * mu * mu),
        (2 * dp.F, k * ov.C * mu * mu),
        (dp.c + 2 * w * dp.L, -(k * ov.C * ov.C + ov.b2) * mu * mu),
    ]
    scale = max(abs(float(x)) for pr in pairs for x in pr) or 1.0
    return tuple(abs(float(a) - float(b)) / scale for a, b in pairs)


def mu_quadratic(dp: DarkParams, omega) -> List:
    """Eliminate b^2, 1 - alpha^2 and C from the last matching equation.

    With b^2 = 2L/mu, 1 - alpha^2 = -2 omega/mu, C = M/(L mu) (first three
    equations), the fifth equation times mu is a polynomial in mu; returns its
    ascending coefficients.
    """
    mu_inv = lambda k: PowerSum({-1: k})  # noqa: E731
    b2 = mu_inv(2 * dp.L)
    k = mu_inv(-2 * omega)
    C = mu_inv(dp.M / dp.L)
    fifth = PowerSum.const(dp.c + 2 * omega * dp.L) + (k * C * C + b2) * PowerSum({2: 1})
    poly = fifth.shift(-fifth.min_exponent())
    return [poly.coeff(i) for i in range(int(poly.max_exponent()) + 1)]


def _quadratic_roots(coeffs):
    c0, c1, c2 = (list(coeffs) + [0, 0, 0])[:3]
    if c2 == 0:
        return [-c0 / c1] if c1 != 0 else [], None
    D = c1 * c1 - 4 * c2 * c0
    if D < 0:
        raise NoRealMu(f"discriminant of the mu-quadratic is negative ({float(D):.6g})")
    s = _sqrt(D)
    return [(s - c1) / (2 * c2), (-s - c1) / (2 * c2)], D


def oval_match(dp: DarkParams, rtol: float = 1e-9) -> OvalParams:
    """Cartesian-oval parameters (alpha^2, C, b^2, mu) solving the five matching equations."""
    _check_L(dp)
    if dp.F == 0 and dp.omega2 == 0:
        if dp.c == 0:
            raise NoOvalSolution("F = omega = c = 0: a parabola, no oval scaling")
        mu = -dp.c / (2 * dp.L)
        b2 = 2 * dp.L / mu
        C = dp.M / (dp.L * mu)
        ov = OvalParams(_num(1), C, b2, mu, None, "conic", _num(0))
        ov.residuals = matching_residuals(dp, ov)
        return ov
    lhs, rhs = dp.F * dp.F * dp.L * dp.L, dp.omega2 * dp.M * dp.M
    exact_data = is_exact(lhs) and is_exact(rhs)
    if (lhs != rhs) if exact_data else (_rel(lhs, rhs) > rtol and not (lhs == 0 and rhs == 0)):
        raise NoOvalSolution(f"F^2 L^2 = {float(lhs):.6g} differs from omega^2 M^2 = {float(rhs):.6g}")
    if dp.omega2 < 0:
        raise NoOvalSolution("omega^2 < 0: no real rotating frame")
    w = _sqrt(dp.omega2)
    # the sign of omega is free; choose it so that F L + omega M = 0
    omega = -w if _rel(dp.F * dp.L, w * dp.M) <= max(rtol, 1e-12) or dp.F * dp.L * dp.M > 0 else w
    if dp.M == 0:
        omega = -w if dp.omega_sign < 0 else w
    coeffs = mu_quadratic(dp, omega)
    roots, D = _quadratic_roots(coeffs)
    preferred = None
    if D is not None:
        # (sqrt(D) - B)/(4L): the root singled out when both are admissible
        preferred = roots[0]
    cands = []
    for mu in roots:
        if mu == 0:
            continue
        k = -2 * omega / mu
        alpha2 = 1 - k
        b2 = 2 * dp.L / mu
        C = dp.M / (dp.L * mu)
        if alpha2 != 0:
            a2 = (C * C - b2) / alpha2
            realizable = alpha2 > 0 and a2 >= -1e-12 * max(1.0, abs(float(C * C)))
        else:
            a2 = None
            realizable = _rel(C * C, b2) <= 1e-12
        ov = OvalParams(alpha2, C, b2, mu, a2, "oval", omega, (), bool(realizable))
        ov.residuals = matching_residuals(dp, ov)
        if max(ov.residuals) <= 1e-12:
            cands.append(ov)
    if not cands:
        raise NoOvalSolution("no root of the mu-quadratic satisfies all five matching equations")
    cands.sort(key=lambda o: (not o.realizable, o.mu != preferred, max(o.residuals), abs(float(o.mu))))
    return cands[0]


# ---------------------------------------------------------------- invariance family

def shift_polynomials(dp: DarkParams) -> Dict[str, PowerSum]:
    """omega~^2, F~, c~, M~, L~^2 as polynomials in alpha (PowerSum in the variable alpha)."""
    w2 = PowerSum({0: dp.omega2, 1: 2 * dp.F, 2: -dp.c, 3: 2 * dp.M, 4: dp.L * dp.L})
    return {
        "omega2": w2,
        "F": PowerSum({0: dp.F, 1: -dp.c, 2: 3 * dp.M, 3: 2 * dp.L * dp.L}),
        "c": PowerSum({0: dp.c, 1: -6 * dp.M, 2: -6 * dp.L * dp.L}),
        "M": PowerSum({0: dp.M, 1: 2 * dp.L * dp.L}),
        "L2": PowerSum.const(dp.L * dp.L),
    }


def derivative_identities(dp: DarkParams) -> Dict[str, bool]:
    """F~ = w'/2, c~ = -w''/2, M~ = w'''/12, L~^2 = w''''/24 with w = omega~^2."""
    P = shift_polynomials(dp)
    d1 = P["omega2"].derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    d4 = d3.derivative()
    half, twelfth, tw4 = Fraction(1, 2), Fraction(1, 12), Fraction(1, 24)
    return {
        "F": d1 * half == P["F"],
        "c": d2 * (-half) == P["c"],
        "M": d3 * twelfth == P["M"],
        "L2": d4 * tw4 == P["L2"],
    }


def _eval_poly(ps: PowerSum, x):
    return sum(k * (x ** int(e)) for e, k in ps.items()) if ps.items() else _num(0)


def dark_shift_params(alpha, dp: DarkParams) -> DarkParams:
    """Parameters of the dark equation after E*_alpha B_alpha."""
    alpha = _num(alpha)
    ident = derivative_identities(dp)
    if not all(ident.values()):
        raise AssertionError(f"derivative identities failed: {ident}")
    P = shift_polynomials(dp)
    return DarkParams(_eval_poly(P["M"], alpha), _eval_poly(P["F"], alpha), _eval_poly(P["omega2"], alpha),
                      dp.L, _eval_poly(P["c"], alpha), dp.omega_sign)


def dark_shift_transform(alpha):
    """E*_alpha B_alpha (B applied first)."""
    return compose([named_transform("Estar", alpha), named_transform("B", alpha)])


def reduction_polynomial(dp: DarkParams) -> PowerSum:
    """F~^2 L^2 - omega~^2 M~^2 as a polynomial in alpha."""
    P = shift_polynomials(dp)
    return P["F"] * P["F"] * P["L2"] - P["omega2"] * P["M"] * P["M"]


def reduction_cubic(dp: DarkParams) -> List:
    """Ascending coefficients of the reduction cubic (alpha^4..alpha^6 vanish)."""
    poly = reduction_polynomial(dp)
    coeffs = [poly.coeff(i) for i in range(7)]
    scale = max(abs(float(x)) for x in coeffs) or 1.0
    for i in (4, 5, 6):
        if abs(float(coeffs[i])) > 1e-12 * scale:
            raise AssertionError(f"alpha^{i} coefficient does not vanish: {coeffs[i]}")
    return coeffs[:4]


def dark_reduce(dp: DarkParams) -> object:
    """alpha such that the shifted parameters satisfy F~^2 L^2 = omega~^2 M~^2.

    Among real roots the one whose shifted data admits an oval match is
    preferred, then the smallest residual, then the smallest magnitude.
    """
    c0, c1, c2, c3 = reduction_cubic(dp)
    scale = max(abs(float(x)) for x in (c0, c1, c2, c3)) or 1.0
    if abs(float(c3)) <= 1e-12 * scale:
        # leading term vanishes: (2 alpha L^2 + M)^2 (F^2 L^2 - omega^2 M^2) = 0
        if abs(float(c0)) <= 1e-12 * scale:
            return _num(0)
        return -dp.M / (2 * dp.L * dp.L)
    roots = np.roots([float(c3), float(c2), float(c1), float(c0)])
    real = [float(z.real) for z in roots if abs(z.imag) <= 1e-7 * max(1.0, abs(z))]
    poly = [float(c3), float(c2), float(c1), float(c0)]
    polished = []
    for a in real:
        for _ in range(4):
            f, df = np.polyval(poly, a), np.polyval(np.polyder(poly), a)
            if df == 0:
                break
            a -= f / df
        polished.append(a)

    def score(a):
        sh = dark_shift_params(a, dp)
        res = _rel(sh.F * sh.F * sh.L * sh.L, sh.omega2 * sh.M * sh.M) if (sh.F or sh.omega2) else 0.0
        try:
            oval_match(sh)
            ok = True
        except Exception:
            ok = False
        return (not ok, res, abs(a))

    return min(polished, key=score)


def unrotate(r, p, w):
    """Inverse of the rotating-frame point map: back to the inertial-frame (r, p)."""
    r = np.asarray(r, dtype=float)
    q = 1.0 / np.asarray(p, dtype=float) ** 2
    q0 = (1 + w * r * r) ** 2 * q - 2 * w - w * w * r * r
    return r, 1.0 / np.sqrt(q0)
