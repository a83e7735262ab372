"""f-spirals: the curves r^alpha = (c/l) f(l alpha phi + phi0).

If f solves f'^2 = P0 + P1 f^2 + P2 f^4, the base curve r = f(phi) has pedal
equation 1/p^2 = 1/r^2 + P(r)/r^4, and scaling, harmonic and complex power
carry it to

    1/p^2 = (1 + P1 l^2)/r^2 + P2 l^4 c^-2 r^(2 alpha - 2) + P0 c^2 / r^(2 alpha + 2).

Every elliptic family is a point (a, beta, gamma) of this three-term equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .curves import Sampler
from .elliptic import elliptic_K, jacobi, sn_star
from .errors import BackSubstitutionMismatch, DomainError, InvalidFamilyParams, NoCurve
from .expr import PedalEquation, PowerSum, as_exponent, coerce, cpow, is_exact
from .paths import PolarPath
from .transforms import apply_transform, compose, named_transform

FAMILIES = ("exp", "id", "sin", "cos", "sinh", "cosh", "sn", "cn", "dn", "sc", "ds", "sn_star")
ELLIPTIC = ("sn", "cn", "dn", "sc", "ds")


@dataclass(frozen=True)
class SpiralParams:
    family: str
    alpha: object = Fraction(1)
    l: object = 1
    c: object = 1
    k: object = 0
    lam: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidFamilyParams(f"unknown family {self.family!r}")
        object.__setattr__(self, "alpha", as_exponent(self.alpha))
        for name in ("l", "c", "k"):
            object.__setattr__(self, name, coerce(getattr(self, name)))
        if self.alpha == 0:
            raise InvalidFamilyParams("alpha must be nonzero")
        if self.l == 0:
            raise InvalidFamilyParams("l must be nonzero")
        if self.c == 0:
            raise InvalidFamilyParams("c must be nonzero")
        if self.family in ELLIPTIC and not -1 < self.k < 1:
            raise InvalidFamilyParams("elliptic modulus must satisfy |k| < 1")
        if self.family in ("dn", "ds") and self.k == 0:
            raise InvalidFamilyParams(f"{self.family} needs k != 0 (k = 0 makes the curve degenerate)")


@dataclass(frozen=True)
class EllipticTriple:
    """1/p^2 = a/r^2 + beta r^(2 alpha - 2) + gamma / r^(2 alpha + 2)."""

    a: object
    beta: object
    gamma: object
    alpha: object = Fraction(1)

    def __post_init__(self):
        for name in ("a", "beta", "gamma"):
            object.__setattr__(self, name, coerce(getattr(self, name)))
        object.__setattr__(self, "alpha", as_exponent(self.alpha))

    def equation(self) -> PedalEquation:
        al = self.alpha
        rhs = PowerSum({-2: self.a}) + PowerSum({2 * al - 2: self.beta}) + PowerSum({-2 * al - 2: self.gamma})
        return PedalEquation([-rhs, PowerSum.const(1)])


def ode_coefficients(family: str, k=0, lam: float = 0.0) -> Tuple:
    """(P0, P1, P2) with f'^2 = P0 + P1 f^2 + P2 f^4 (exp: f'^2 = f^2)."""
    k = coerce(k)
    k2 = k * k
    kp2 = 1 - k2
    table = {
        "exp": (0, 1, 0),
        "id": (1, 0, 0),
        "sin": (1, -1, 0),
        "cos": (1, -1, 0),
        "sinh": (1, 1, 0),
        "cosh": (-1, 1, 0),
        "sn": (1, -(1 + k2), k2),
        "cn": (kp2, k2 - kp2, -k2),
        "dn": (-kp2, 1 + kp2, -1),
        "sc": (1, 1 + kp2, kp2),
        "ds": (-k2 * kp2, k2 - kp2, 1),
        "sn_star": (1, -2 * math.cos(lam), 1),
    }
    return tuple(coerce(x) for x in table[family])


def base_equation(family: str, k=0, lam: float = 0.0) -> PedalEquation:
    """Pedal equation of r = f(phi): r^4 q = r^2 + P(r)."""
    P0, P1, P2 = ode_coefficients(family, k, lam)
    rhs = PowerSum({0: P0, 2: 1 + P1, 4: P2})
    return PedalEquation([-rhs, PowerSum({4: 1})])


def spiral_pipeline(sp: SpiralParams):
    """S((l/c)^(1/alpha)) H(1/l) M(alpha), rightmost first."""
    ratio = abs(sp.l / sp.c) if is_exact(sp.l) and is_exact(sp.c) else abs(float(sp.l) / float(sp.c))
    s = cpow(ratio, 1 / sp.alpha)
    inv_l = 1 / sp.l if is_exact(sp.l) else 1.0 / float(sp.l)
    return compose([named_transform("S", s), named_transform("H", inv_l), named_transform("M", sp.alpha)])


def f_spiral_equation(sp: SpiralParams) -> PedalEquation:
    """Pedal equation of an f-spiral, built by transforming the base curve."""
    return apply_transform(spiral_pipeline(sp), base_equation(sp.family, sp.k, sp.lam))


def spiral_coefficients(family: str, alpha, l2, c2, k=0, lam: float = 0.0) -> EllipticTriple:
    """Closed-form (a, beta, gamma) in terms of l^2 and c^2.

    Squares are accepted as independent (possibly negative) numbers so that
    formal substitutions such as l -> i l can be checked coefficientwise.
    """
    P0, P1, P2 = ode_coefficients(family, k, lam)
    l2, c2 = coerce(l2), coerce(c2)
    return EllipticTriple(1 + P1 * l2, P2 * l2 * l2 / c2, P0 * c2, alpha)


# ---------------------------------------------------------------- sampling

def _f_and_derivative(family: str, z, k, lam):
    z = np.asarray(z, dtype=float)
    if family == "exp":
        v = np.exp(z)
        return v, v
    if family == "id":
        return z.copy(), np.ones_like(z)
    if family == "sin":
        return np.sin(z), np.cos(z)
    if family == "cos":
        return np.cos(z), -np.sin(z)
    if family == "sinh":
        return np.sinh(z), np.cosh(z)
    if family == "cosh":
        return np.cosh(z), np.sinh(z)
    if family == "sn_star":
        return sn_star(z, lam)
    s, c, d = jacobi(z, float(k))
    kk = float(k) ** 2
    if family == "sn":
        return s, c * d
    if family == "cn":
        return c, -s * d
    if family == "dn":
        return d, -kk * s * c
    if family == "sc":
        return s / c, d / (c * c)
    if family == "ds":
        return d / s, -c / (s * s)
    raise InvalidFamilyParams(family)


def _sn_star_positive_run(lam: float):
    # sn* starts at 0 with slope 1; walk right until its next zero
    step = 1e-3
    z0 = step
    for _ in range(100):
        z = z0 + step * np.arange(1000)
        v, _ = sn_star(z, lam)
        neg = np.nonzero(v <= 0)[0]
        if neg.size:
            return 0.0, float(z[neg[0]])
        z0 = float(z[-1]) + step
    raise InvalidFamilyParams("sn* has no zero within reach")


def default_argument_range(sp: SpiralParams) -> Tuple[float, float]:
    """An interval of z = l alpha phi + phi0 on which f stays positive."""
    f = sp.family
    if f in ELLIPTIC:
        K = elliptic_K(float(sp.k))
    ranges = {
        "exp": (-3.0, 3.0),
        "id": (0.1, 6 * math.pi),
        "sin": (0.0, math.pi),
        "cos": (-math.pi / 2, math.pi / 2),
        "sinh": (0.0, 3.0),
        "cosh": (-3.0, 3.0),
    }
    if f in ranges:
        return ranges[f]
    if f == "sn":
        return (0.0, 2 * K)
    if f == "cn":
        return (-K, K)
    if f == "dn":
        return (-2 * K, 2 * K)
    if f == "sc":
        return (0.0, K)
    if f == "ds":
        return (0.0, 2 * K)
    return _sn_star_positive_run(sp.lam)


def _radius_factor(sp: SpiralParams):
    inv = 1 / sp.alpha
    cl = float(sp.c) / float(sp.l)

    def radius(z):
        base = cl * _f_and_derivative(sp.family, z, sp.k, sp.lam)[0]
        if np.any(base == 0):
            raise DomainError("curve passes through the pedal point")
        if np.any(base < 0):
            if inv.denominator % 2 == 0:
                raise DomainError("f changes sign and alpha has an even numerator")
            return np.sign(base) ** inv.numerator * np.abs(base) ** float(inv)
        return base ** float(inv)

    return radius


def f_spiral_sampler(sp: SpiralParams, z_range: Optional[Tuple[float, float]] = None, margin: float = 1e-2) -> Sampler:
    """Sampler in phi with exact tangent (r'/r = l f'/f); signed r is allowed."""
    lo, hi = z_range or default_argument_range(sp)
    pad = margin * (hi - lo)
    lo, hi = lo + pad, hi - pad
    la = float(sp.l) * float(sp.alpha)
    phis = sorted(((lo - sp.phi0) / la, (hi - sp.phi0) / la))
    radius = _radius_factor(sp)
    lf = float(sp.l)

    def z_of(phi):
        return la * np.asarray(phi, dtype=float) + sp.phi0

    def point(phi):
        phi = np.asarray(phi, dtype=float)
        r = radius(z_of(phi))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi)])

    def tangent(phi):
        phi = np.asarray(phi, dtype=float)
        z = z_of(phi)
        r = radius(z)
        fv, dfv = _f_and_derivative(sp.family, z, sp.k, sp.lam)
        dr = r * lf * dfv / fv
        return np.column_stack([dr * np.cos(phi) - r * np.sin(phi), dr * np.sin(phi) + r * np.cos(phi)])

    return Sampler(point, (phis[0], phis[1]), tangent)


def sample_f_spiral(sp: SpiralParams, z_range: Optional[Tuple[float, float]] = None, n: int = 2000) -> PolarPath:
    """Direct evaluation of r^alpha = (c/l) f(l alpha phi + phi0)."""
    smp = f_spiral_sampler(sp, z_range)
    phi = np.linspace(*smp.t_range, n)
    xy = smp.point(phi)
    r = np.hypot(xy[:, 0], xy[:, 1])
    ang = np.unwrap(np.arctan2(xy[:, 1], xy[:, 0]))
    return PolarPath(r, ang)


# ---------------------------------------------------------------- classification

def classify_spiral(t: EllipticTriple) -> str:
    """Family of the three-term equation.

    With u = l^2, v = l^2 k^2 the sn coefficients read u + v = 1 - a and
    u v = beta gamma, so the real/complex split is decided by
    (a - 1)^2 against 4 beta gamma.
    """
    a, b, g = t.a, t.beta, t.gamma
    disc = (a - 1) ** 2 - 4 * b * g
    if b == 0 or g == 0:
        if b == 0 and g == 0:
            return "log_spiral"
        if a == 1:
            return "id"
        bb = g if b == 0 else b
        if a < 1 and bb < 0:
            raise NoCurve("a < 1 with negative coefficient forces p > r")
        if a < 1:
            return "sin"
        return "sinh" if bb > 0 else "cosh"
    if b > 0 and g > 0:
        if disc <= 0:
            return "sn_star"
        return "sn" if a < 1 else "sc"
    if b < 0 and g > 0:
        return "cn"
    if b > 0 and g < 0:
        return "ds"
    if disc >= 0:
        return "dn"
    raise NoCurve("beta < 0, gamma < 0 and (a-1)^2 < 4 beta gamma forces p > r")


# exact arithmetic in Q(sqrt d)
@dataclass(frozen=True)
class Surd:
    """x + y sqrt(d) with rational x, y and a fixed rational radicand d."""

    x: Fraction
    y: Fraction
    d: Fraction

    @classmethod
    def rational(cls, x, d):
        return cls(Fraction(x), Fraction(0), Fraction(d))

    def __add__(self, o):
        o = self._lift(o)
        return Surd(self.x + o.x, self.y + o.y, self.d)

    def __sub__(self, o):
        o = self._lift(o)
        return Surd(self.x - o.x, self.y - o.y, self.d)

    def __rsub__(self, o):
        return self._lift(o) - self

    __radd__ = __add__

    def __mul__(self, o):
        o = self._lift(o)
        return Surd(self.x * o.x + self.y * o.y * self.d, self.x * o.y + self.y * o.x, self.d)

    __rmul__ = __mul__

    def conj(self):
        return Surd(self.x, -self.y, self.d)

    def norm(self) -> Fraction:
        return self.x * self.x - self.y * self.y * self.d

    def __truediv__(self, o):
        o = self._lift(o)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero surd")
        num = self * o.conj()
        return Surd(num.x / n, num.y / n, self.d)

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def _lift(self, o):
        if isinstance(o, Surd):
            if o.d != self.d and o.y != 0 and self.y != 0:
                raise ValueError("surds over different radicands")
            return o if o.d == self.d else Surd(o.x, o.y, self.d)
        return Surd(Fraction(o), Fraction(0), self.d)

    def __eq__(self, o):
        try:
            o = self._lift(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.x == o.x and self.y == o.y

    def __hash__(self):
        return hash((self.x, self.y, self.d))

    def __float__(self):
        return float(self.x) + float(self.y) * math.sqrt(float(self.d))

    def __str__(self):
        if self.y == 0:
            return str(self.x)
        mag = abs(self.y)
        rad = f"sqrt({self.d})" if mag == 1 else f"({mag})*sqrt({self.d})"
        sign = "-" if self.y < 0 else "+"
        if self.x == 0:
            return rad if sign == "+" else f"-{rad}"
        return f"{self.x} {sign} {rad}"


def _sqrt_surd(v: Fraction) -> Surd:
    """sqrt(v) as a surd; collapses to a rational when v is a perfect square."""
    num, den = v.numerator, v.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Surd.rational(Fraction(rn, rd), 0)
    return Surd(Fraction(0), Fraction(1), v)


@dataclass
class SnRecovery:
    c2: Surd
    l2: Surd
    k2: Surd
    c: float
    k: float
    l2_printed: Surd
    validating_form: str

    @property
    def l2_float(self) -> float:
        return float(self.l2)


def _sn_back_substitute(c2, l2, k2):
    one = 1
    a = one - l2 * (k2 + one)
    beta = l2 * l2 * k2 / c2
    return a, beta, c2


def recover_sn_params(t: EllipticTriple) -> SnRecovery:
    """c, l^2, k of an sn-spiral with the given (a, beta, gamma), exactly.

    l^2 is the larger root of u^2 - (1-a) u + beta gamma = 0 and l^2 k^2 the
    smaller. The result is validated by substituting back into the sn
    coefficients; the alternative l^2 = sqrt(D) + 1 - a (twice the root) is
    kept for comparison.
    """
    a, b, g = (Fraction(x) if not isinstance(x, Fraction) else x for x in (t.a, t.beta, t.gamma))
    if g <= 0 or b < 0 or a >= 1:
        raise InvalidFamilyParams("not an sn triple")
    tag = classify_spiral(t)
    if tag not in ("sn", "sin"):
        raise InvalidFamilyParams(f"triple classifies as {tag}, not sn")
    D = (1 - a) ** 2 - 4 * b * g
    root = _sqrt_surd(D)
    d = root.d
    half = Fraction(1, 2)
    u = (Surd.rational(1 - a, d) + root) * half
    v = (Surd.rational(1 - a, d) - root) * half
    c2 = Surd.rational(g, d)
    l2 = u
    k2 = v / u
    printed = root + (1 - a)
    got = _sn_back_substitute(c2, l2, k2)
    if not (got[0] == a and got[1] == b and got[2] == g):
        alt = _sn_back_substitute(c2, printed, v / printed)
        raise BackSubstitutionMismatch(
            f"neither l^2 = {l2} nor l^2 = {printed} reproduces ({a}, {b}, {g}); got {got} / {alt}")
    alt = _sn_back_substitute(c2, printed, v / printed)
    form = "quadratic root" if not (alt[0] == a and alt[1] == b) else "both"
    return SnRecovery(c2, l2, k2, math.sqrt(float(g)), math.sqrt(max(float(k2), 0.0)), printed, form)
