"""Named curves, reconstruction of polar curves from pedal equations, and sampling.

Reconstruction integrates ``dphi/dr = +-1/(r sqrt(r^2 q(r) - 1))`` between
apsides (roots of ``r^2 q = 1``). Near an apsis the substitution
``r = r_apsis +- u^2`` removes the inverse-square-root singularity. A pedal
equation fixes a curve only up to rotation (and sometimes more), so every
reconstruction starts at ``phi = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import (CuspDetected, InvalidParam, MultiBranchAmbiguity, PedalError,
                     StartOutsideRegion, UnknownCurve)
from .expr import PedalEquation, PowerSum, coerce
from .mechanics import _compile, equation_residuals
from .parser import parse_pedal_equation
from .paths import PolarPath

CURVES = ("line", "point", "circle_centered", "circle_on", "circle_offset", "concentric",
          "log_spiral", "circle_involute", "archimedes", "spiral_family", "conic_focus",
          "sinusoidal", "cassini_focus", "cassini_center", "cartesian_oval")


@dataclass
class Sampler:
    """Parametric plane curve t -> (x, y) with an optional exact tangent."""

    point: Callable
    t_range: tuple
    tangent: Optional[Callable] = None
    closed: bool = False

    def grid(self, n: int, margin: float = 0.0):
        lo, hi = self.t_range
        if self.closed:
            return np.linspace(lo, hi, n, endpoint=False)
        pad = margin * (hi - lo)
        return np.linspace(lo + pad, hi - pad, n)


@dataclass
class CatalogEntry:
    name: str
    params: dict
    equation: PedalEquation
    sampler: Optional[Sampler] = None
    note: str = ""
    check_residual: float = field(default=float("nan"))


def _polar_sampler(rfun, drfun, lo, hi, closed=False):
    def point(t):
        t = np.asarray(t, dtype=float)
        r = rfun(t)
        return np.column_stack([r * np.cos(t), r * np.sin(t)])

    def tangent(t):
        t = np.asarray(t, dtype=float)
        r, dr = rfun(t), drfun(t)
        return np.column_stack([dr * np.cos(t) - r * np.sin(t), dr * np.sin(t) + r * np.cos(t)])

    return Sampler(point, (lo, hi), tangent, closed)


def _param(params, name, default=None, positive=False, nonneg=False):
    if name not in params:
        if default is None:
            raise InvalidParam(f"missing parameter {name!r}")
        return coerce(default)
    v = coerce(params[name])
    if positive and not v > 0:
        raise InvalidParam(f"{name} must be positive")
    if nonneg and v < 0:
        raise InvalidParam(f"{name} must be nonnegative")
    return v


def catalog(name: str, **params) -> CatalogEntry:
    """Pedal equation (and a sampler where one exists) of a named curve."""
    if name not in CURVES:
        raise UnknownCurve(f"unknown curve {name!r}; known: {', '.join(CURVES)}")
    builder = globals()[f"_cat_{name}"]
    entry = builder(params)
    if entry.sampler is not None:
        t = entry.sampler.grid(64, margin=0.01)
        r, p = curve_to_pedal_samples(entry.sampler, t=t)
        # tangents through the pedal point (p = 0) have no finite q, and near
        # them q = 1/p^2 amplifies rounding in p by r/p
        ok = p > 1e-6 * r
        res = float(np.max(equation_residuals(entry.equation, r[ok], p[ok])))
        entry.check_residual = res
        if res > 1e-9:
            raise PedalError(f"catalog sampler for {name} misses its equation (residual {res:.3g})")
    return entry


def _eq(text, **consts):
    return parse_pedal_equation(text, consts)


def _cat_line(P):
    a = _param(P, "a", 1, positive=True)
    af = float(a)
    pt = lambda t: np.column_stack([np.full_like(np.asarray(t, float), af), np.asarray(t, float)])  # noqa: E731
    tg = lambda t: np.column_stack([np.zeros_like(np.asarray(t, float)), np.ones_like(np.asarray(t, float))])  # noqa: E731
    return CatalogEntry("line", {"a": a}, _eq("p = a", a=a), Sampler(pt, (-5 * af, 5 * af), tg))


def _cat_point(P):
    a = _param(P, "a", 1, positive=True)
    return CatalogEntry("point", {"a": a}, PedalEquation([PowerSum({1: 1, 0: -a})]), None,
                        "r = a: a single point; every line through it is a tangent")


def _circle(R, a):
    Rf, af = float(R), float(a)
    pt = lambda t: np.column_stack([af + Rf * np.cos(t), Rf * np.sin(t)])  # noqa: E731
    tg = lambda t: np.column_stack([-Rf * np.sin(t), Rf * np.cos(t)])  # noqa: E731
    return Sampler(pt, (0.0, 2 * math.pi), tg, closed=True)


def _cat_circle_offset(P):
    R = _param(P, "R", 1, positive=True)
    a = _param(P, "a", 0, nonneg=True)
    smp = _circle(R, a)
    if a == R:
        # the circle passes through the pedal point at t = pi
        smp = Sampler(smp.point, (-math.pi + 1e-2, math.pi - 1e-2), smp.tangent)
    return CatalogEntry("circle_offset", {"R": R, "a": a},
                        _eq("2*R*p = r^2 + R^2 - a^2", R=R, a=a), smp)


def _cat_circle_centered(P):
    R = _param(P, "R", 1, positive=True)
    e = _cat_circle_offset({"R": R, "a": 0})
    return CatalogEntry("circle_centered", {"R": R}, e.equation, e.sampler, "p = R together with r = R")


def _cat_circle_on(P):
    R = _param(P, "R", 1, positive=True)
    smp = _circle(R, R)
    # the curve passes through the pedal point at t = pi
    smp = Sampler(smp.point, (-math.pi + 1e-2, math.pi - 1e-2), smp.tangent)
    return CatalogEntry("circle_on", {"R": R}, _eq("2*R*p = r^2", R=R), smp)


def _cat_concentric(P):
    R = _param(P, "R", 1, positive=True)
    return CatalogEntry("concentric", {"R": R}, _eq("p = r"), _circle(R, 0),
                        "p = r holds for every circle centred at the pedal point")


def _cat_log_spiral(P):
    alpha = float(_param(P, "alpha", Fraction(1, 3)))
    s = abs(math.sin(alpha))
    if not 0 < s < 1:
        raise InvalidParam("log spiral needs 0 < |sin alpha| < 1")
    k = math.cos(alpha) / math.sin(alpha)
    e = PedalEquation([PowerSum.const(-1), PowerSum({2: s * s})])
    return CatalogEntry("log_spiral", {"alpha": alpha}, e,
                        _polar_sampler(lambda t: np.exp(k * t), lambda t: k * np.exp(k * t), -math.pi, math.pi))


def _cat_circle_involute(P):
    a = _param(P, "a", 1, positive=True)
    af = float(a)
    pt = lambda t: np.column_stack([af * (np.cos(t) + t * np.sin(t)), af * (np.sin(t) - t * np.cos(t))])  # noqa: E731
    tg = lambda t: np.column_stack([af * t * np.cos(t), af * t * np.sin(t)])  # noqa: E731
    return CatalogEntry("circle_involute", {"a": a}, _eq("p^2 = r^2 - a^2", a=a), Sampler(pt, (0.2, 6 * math.pi), tg),
                        "contrapedal coordinate p_c = a")


def _cat_archimedes(P):
    a = _param(P, "a", 1, positive=True)
    af = float(a)
    return CatalogEntry("archimedes", {"a": a}, _eq("1/p^2 = 1/r^2 + a^2/r^4", a=a),
                        _polar_sampler(lambda t: af * t, lambda t: af + 0 * t, 0.1, 6 * math.pi))


def _cat_conic_focus(P):
    L = _param(P, "L", 1)
    M = _param(P, "M", 1, positive=True)
    c = _param(P, "c", Fraction(-1, 2))
    if L == 0:
        raise InvalidParam("L must be nonzero")
    Lf, Mf, cf = float(L), float(M), float(c)
    e2 = 1 + cf * Lf * Lf / (Mf * Mf)
    if e2 < 0:
        raise InvalidParam("no real conic: c < -M^2/L^2")
    ecc = math.sqrt(e2)
    ell = Lf * Lf / Mf
    rf = lambda t: ell / (1 + ecc * np.cos(t))  # noqa: E731
    drf = lambda t: ell * ecc * np.sin(t) / (1 + ecc * np.cos(t)) ** 2  # noqa: E731
    if ecc < 1:
        smp = _polar_sampler(rf, drf, 0.0, 2 * math.pi, closed=True)
    else:
        tmax = 0.95 * math.acos(-1 / ecc)
        smp = _polar_sampler(rf, drf, -tmax, tmax)
    return CatalogEntry("conic_focus", {"L": L, "M": M, "c": c, "eccentricity": ecc},
                        _eq("L^2/p^2 = 2*M/r + c", L=L, M=M, c=c), smp)


def _cat_sinusoidal(P):
    n = Fraction(P.get("n", 1)) if not isinstance(P.get("n", 1), float) else Fraction(repr(P["n"]))
    a = _param(P, "a", 1, positive=True)
    if n == 0:
        raise InvalidParam("n must be nonzero")
    # a^n p = r^(n+1)  ->  r^(2n+2) q = a^(2n)
    e = PedalEquation([PowerSum.const(-(a ** (2 * n) if n.denominator == 1 else float(a) ** float(2 * n))),
                       PowerSum({2 * n + 2: 1})])
    nf, af = float(n), float(a)
    lo, hi = (0.0, math.pi / nf) if nf > 0 else (math.pi / nf, 0.0)
    pad = 1e-2 * abs(hi - lo)
    rf = lambda t: af * np.sin(nf * t) ** (1 / nf)  # noqa: E731
    drf = lambda t: af * np.sin(nf * t) ** (1 / nf - 1) * np.cos(nf * t)  # noqa: E731
    return CatalogEntry("sinusoidal", {"n": n, "a": a}, e, _polar_sampler(rf, drf, lo + pad, hi - pad))


def _implicit_polar(P, dP_r, dP_phi, pick):
    """Sampler for a curve given by a polynomial P(r, phi) = 0 in r."""
    def rfun(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        for i, tt in enumerate(t):
            roots = np.roots(P(tt))
            real = [z.real for z in roots if abs(z.imag) < 1e-7 and z.real > 0]
            if not real:
                raise PedalError("ray misses the curve")
            r0 = pick(real)
            # polish with Newton on the polynomial
            coeffs = P(tt)
            for _ in range(3):
                f = np.polyval(coeffs, r0)
                df = np.polyval(np.polyder(coeffs), r0)
                if df == 0:
                    break
                r0 -= f / df
            out[i] = r0
        return out

    def drfun(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        r = rfun(t)
        return -dP_phi(r, t) / dP_r(r, t)

    return rfun, drfun


def _cat_cartesian_oval(P):
    alpha = _param(P, "alpha", Fraction(1, 2))
    A = _param(P, "a", 1, nonneg=True)
    C = _param(P, "C", 2, positive=True)
    b2 = C * C - alpha * alpha * A * A
    if not b2 > 0:
        raise InvalidParam("pedal point must lie inside the oval: alpha*|a| < C")
    k = 1 - alpha * alpha
    e = _eq("(b2 - k*r^2)^2/(4*p^2) = C*b2/r + k*C*r - (k*C^2 + b2)", b2=b2, k=k, C=C)
    al, Af, Cf = float(alpha), float(A), float(C)
    poly = lambda t: [al * al - 1, 2 * Cf - 2 * al * al * Af * math.cos(t), al * al * Af * Af - Cf * Cf]  # noqa: E731
    dPr = lambda r, t: 2 * (al * al - 1) * r + 2 * Cf - 2 * al * al * Af * np.cos(t)  # noqa: E731
    dPp = lambda r, t: 2 * al * al * Af * np.sin(t) * r  # noqa: E731
    rf, drf = _implicit_polar(poly, dPr, dPp, lambda rs: min(x for x in rs if x <= Cf + 1e-12) if any(x <= Cf + 1e-12 for x in rs) else min(rs))
    return CatalogEntry("cartesian_oval", {"alpha": alpha, "a": A, "C": C, "b2": b2}, e,
                        _polar_sampler(rf, drf, 0.0, 2 * math.pi, closed=True),
                        "|x| + alpha|x - a| = C; the equation also holds for -alpha")


def _cat_cassini_focus(P):
    A = _param(P, "a", 1, nonneg=True)
    C = _param(P, "C", Fraction(3, 5), positive=True)
    e = _eq("(3*C^2 + r^4 - a^2*r^2)^2/p^2 = 4*C^2*(2*C^2/r^2 + 2*r^2 - a^2)", a=A, C=C)
    Af, Cf = float(A), float(C)
    poly = lambda t: [1.0, -2 * Af * math.cos(t), Af * Af, 0.0, -Cf * Cf]  # noqa: E731
    dPr = lambda r, t: 4 * r ** 3 - 6 * Af * np.cos(t) * r ** 2 + 2 * Af * Af * r  # noqa: E731
    dPp = lambda r, t: 2 * Af * np.sin(t) * r ** 3  # noqa: E731
    single = Cf > Af * Af / 4
    rf, drf = _implicit_polar(poly, dPr, dPp, max if single else min)
    return CatalogEntry("cassini_focus", {"a": A, "C": C}, e, _polar_sampler(rf, drf, 0.0, 2 * math.pi, closed=True),
                        "|x||x - a| = C with the pedal point at a focus")


def _cat_cassini_center(P):
    A = _param(P, "a", 1, nonneg=True)
    C = _param(P, "C", 2, positive=True)
    # square root of the circle |w - a^2| = C, i.e. circle_offset(R=C, a=a^2) under M_2
    e = _eq("(r^4 + R^2 - d^2)^2/p^2 = 4*R^2*r^2", R=C, d=A * A)
    Af, Cf = float(A), float(C)
    big = Cf > Af * Af

    def z_of(t):
        t = np.asarray(t, dtype=float)
        if big:
            w_mod = np.abs(Af * Af + Cf * np.exp(1j * t))
            arg = t + np.angle(1 + (Af * Af / Cf) * np.exp(-1j * t))
            return np.sqrt(w_mod) * np.exp(0.5j * arg)
        return np.sqrt(Af * Af + Cf * np.exp(1j * t))

    pt = lambda t: np.column_stack([z_of(t).real, z_of(t).imag])  # noqa: E731

    def tg(t):
        z = z_of(t)
        dz = 1j * Cf * np.exp(1j * np.asarray(t, dtype=float)) / (2 * z)
        return np.column_stack([dz.real, dz.imag])

    span = 4 * math.pi if big else 2 * math.pi
    return CatalogEntry("cassini_center", {"a": A, "C": C}, e, Sampler(pt, (0.0, span), tg, closed=True),
                        "|x^2 - a^2| = C with the pedal point at the centre")


def _cat_spiral_family(P):
    from .spirals import SpiralParams, f_spiral_equation, f_spiral_sampler

    sp = SpiralParams(**P)
    return CatalogEntry("spiral_family", dict(P), f_spiral_equation(sp), f_spiral_sampler(sp))


# ---------------------------------------------------------------- sampling

def curve_to_pedal_samples(sampler: Sampler, pedal_point=(0.0, 0.0), t=None, n: int = 1000):
    """(r, p) of sampled curve points about ``pedal_point``.

    Uses the sampler's exact tangent when present, else an eighth-order
    central difference; CuspDetected when the tangent degenerates.
    """
    if t is None:
        t = sampler.grid(n, margin=0.01)
    t = np.asarray(t, dtype=float)
    O = np.asarray(pedal_point, dtype=float)
    X = np.asarray(sampler.point(t), dtype=float) - O
    if sampler.tangent is not None:
        T = np.asarray(sampler.tangent(t), dtype=float)
    else:
        T = _fd_tangent(sampler.point, t, sampler.t_range)
    speed = np.hypot(T[:, 0], T[:, 1])
    r = np.hypot(X[:, 0], X[:, 1])
    if np.any(speed <= 1e-10 * r):
        raise CuspDetected("tangent vanishes (cusp or stationary point)")
    p = np.abs(X[:, 0] * T[:, 1] - X[:, 1] * T[:, 0]) / speed
    return r, p


_FD8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _fd_tangent(point, t, t_range):
    h = 1e-3 * max(1.0, abs(t_range[1] - t_range[0])) / 10
    offs = np.arange(-4, 5)
    T = sum(w * np.asarray(point(t + o * h), dtype=float) for w, o in zip(_FD8, offs) if w) / h
    T2 = sum(w * np.asarray(point(t + o * 2 * h), dtype=float) for w, o in zip(_FD8, offs) if w) / (2 * h)
    n1 = np.hypot(T[:, 0], T[:, 1])
    n2 = np.hypot(T2[:, 0], T2[:, 1])
    cross = np.abs(T[:, 0] * T2[:, 1] - T[:, 1] * T2[:, 0]) / np.maximum(n1 * n2, 1e-300)
    if np.any(cross > 1e-6):
        raise CuspDetected("tangent direction unstable under step refinement")
    return T


def path_sampler(path: PolarPath) -> Sampler:
    """Quintic-spline sampler through a reconstructed path, parametrized by chord length."""
    spl, lo, hi = path.as_sampler()
    der = spl.derivative()
    return Sampler(lambda t: spl(t), (lo, hi), lambda t: der(t))


# ---------------------------------------------------------------- reconstruction

class _QOfR:
    """q(r) from a pedal equation, with a root selector for degree > 1."""

    def __init__(self, e: PedalEquation, root_index=None):
        if e.degree == 0:
            raise StartOutsideRegion("equation does not constrain p")
        if e.degree > 1 and root_index is None:
            raise MultiBranchAmbiguity("equation has degree > 1 in q; choose a root index")
        self.e = e
        self.root = root_index
        self.fs = [_compile(c) for c in e.coeffs]

    def __call__(self, r):
        r = float(r)
        if self.e.degree == 1:
            n1 = float(self.fs[1](r))
            if n1 == 0:
                return math.nan
            return -float(self.fs[0](r)) / n1
        vals = [float(f(r)) for f in self.fs]
        roots = np.roots(vals[::-1])
        real = sorted(z.real for z in roots if abs(z.imag) <= 1e-10 * max(1.0, abs(z)) and z.real >= 0)
        return real[self.root] if self.root < len(real) else math.nan

    def g(self, r):
        q = self(r)
        return math.nan if math.isnan(q) else r * r * q - 1.0

    def local_ratio(self, apsis: float, direction: float):
        """u -> g(apsis + direction*u^2) / u^2 without cancellation near the apsis.

        For degree one, g = -h/N1 with h = r^2 N0 + N1, and h is expanded in a
        Taylor series about the apsis (where h vanishes).
        """
        if self.e.degree != 1:
            def ratio(u):
                return self.g(apsis + direction * u * u) / (u * u) if u > 0 else math.nan
            return ratio
        N0, N1 = self.e.coeffs[0], self.e.coeffs[1]
        h = PowerSum({2: 1}) * N0 + N1
        taylor = []
        d = h
        fact = 1.0
        for k in range(1, 13):
            d = d.derivative()
            fact *= k
            taylor.append(float(d.eval_unchecked(apsis)) / fact)
        n1 = self.fs[1]
        hf = _compile(h)
        h0 = float(hf(apsis))
        size = sum(abs(float(k)) * apsis ** float(ex) for ex, k in h.items())
        if abs(h0) <= 1e-12 * size:
            h0 = 0.0

        def ratio(u):
            delta = direction * u * u
            r = apsis + delta
            if delta == 0 and h0 != 0:
                return math.inf
            if abs(delta) < 1e-2 * apsis:
                h_over_delta = sum(c * delta ** i for i, c in enumerate(taylor)) + (h0 / delta if h0 else 0.0)
            else:
                h_over_delta = float(hf(r)) / delta
            return -direction * h_over_delta / float(n1(r))
        return ratio


def _is_concentric(Q: _QOfR, r0: float) -> bool:
    probes = [r0 * f for f in (0.5, 0.9, 1.0, 1.1, 2.0)]
    vals = [Q.g(r) for r in probes]
    return all(not math.isnan(v) and abs(v) < 1e-12 for v in vals)


def _find_apsis(Q: _QOfR, r0: float, direction: int, limit: float = 1e6):
    """First r beyond r0 (in the given direction) where r^2 q - 1 stops being positive."""
    ratio = 1.02
    steps = int(math.log(limit) / math.log(ratio)) + 2
    r = r0
    for _ in range(steps):
        nxt = r * ratio if direction > 0 else r / ratio
        gv = Q.g(nxt)
        if math.isnan(gv) or gv <= 0:
            lo, hi = (r, nxt) if direction > 0 else (nxt, r)
            return _bisect_boundary(Q, lo, hi, direction)
        r = nxt
        if r > r0 * limit or r < r0 / limit:
            return None
    return None


def _bisect_boundary(Q, lo, hi, direction):
    # the admissible side is lo for direction>0, hi for direction<0
    def gsafe(x):
        v = Q.g(x)
        return -1.0 if math.isnan(v) else v

    a, b = (lo, hi) if direction > 0 else (hi, lo)
    if not math.isnan(Q.g(b)):
        try:
            return brentq(Q.g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        except ValueError:
            # q has a pole inside the bracket (a cusp where p = 0)
            pass
    for _ in range(200):
        m = 0.5 * (a + b)
        if gsafe(m) > 0:
            a = m
        else:
            b = m
    return a


def _segment(Q: _QOfR, ra: float, rb: float, n: int, a_apsis: bool = True, b_apsis: bool = True):
    """Samples (r, dphi) from apsis-or-point ra to rb, phi accumulated from ra.

    Apsis ends are handled by r = apsis + u^2 (or minus), so the integrand
    2u / (r sqrt(g)) stays bounded. A regular end gets an even grid in r
    instead, so samples do not bunch up there. The interval is split at its
    midpoint.
    """
    sign = 1.0 if rb > ra else -1.0
    mid = 0.5 * (ra + rb)
    half = abs(mid - ra)

    def half_from(end, direction, apsis):
        if apsis:
            ratio = Q.local_ratio(end, direction)

            def f(u):
                rv = ratio(u)
                if not rv > 0:
                    return 0.0
                return 2.0 / ((end + direction * u * u) * math.sqrt(rv))
            nodes = np.linspace(0.0, math.sqrt(half), n + 1)
            radii = end + direction * nodes ** 2
        else:
            def f(x):
                rr = end + direction * x
                gv = Q.g(rr)
                return 1.0 / (rr * math.sqrt(gv)) if gv > 0 else 0.0
            nodes = np.linspace(0.0, half, n + 1)
            radii = end + direction * nodes
        acc = np.zeros_like(nodes)
        for i in range(n):
            val, _ = quad(f, nodes[i], nodes[i + 1], epsabs=1e-13, epsrel=1e-12, limit=200)
            acc[i + 1] = acc[i] + val
        return radii, acc

    r_first, phi_first = half_from(ra, sign, a_apsis)
    r_second, phi_second_rev = half_from(rb, -sign, b_apsis)
    r_second = r_second[::-1]
    total = phi_first[-1] + phi_second_rev[-1]
    phi_second = total - phi_second_rev[::-1]
    r = np.concatenate([r_first, r_second[1:]])
    phi = np.concatenate([phi_first, phi_second[1:]])
    return r, phi, total


def _segment_radius(Q: _QOfR, ra: float, rb: float, phi_local: float) -> float:
    """Radius reached after turning ``phi_local`` from ra along the segment ra -> rb."""
    r, phi, total = _segment(Q, ra, rb, 8)
    sign = 1.0 if rb > ra else -1.0
    half = abs(0.5 * (ra + rb) - ra)
    first_total = float(phi[8])

    def turned(apsis, direction, u):
        ratio = Q.local_ratio(apsis, direction)

        def f(w):
            rv = ratio(w)
            return 0.0 if not rv > 0 else 2.0 / ((apsis + direction * w * w) * math.sqrt(rv))
        return quad(f, 0.0, u, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    umax = math.sqrt(half)
    if phi_local <= first_total:
        u = brentq(lambda u: turned(ra, sign, u) - phi_local, 0.0, umax, xtol=1e-15)
        return ra + sign * u * u
    u = brentq(lambda u: turned(rb, -sign, u) - (total - phi_local), 0.0, umax, xtol=1e-15)
    return rb - sign * u * u


def _free_run(Q: _QOfR, r0: float, direction: int, phi_budget: float, r_limit: float,
              first_step: float = 0.02):
    """Monotone branch without an apsis ahead, by quadrature of phi(r).

    phi = int dr / (r sqrt(g)) stays finite where r runs off to infinity or
    into the origin within bounded phi, which an ODE in phi cannot resolve.
    The r-grid is geometric, starts at ``first_step`` (to continue the
    spacing of a preceding segment smoothly) and grows gently so that phi
    advances at most 2 pi / 1024 and r by at most 2% per sample.
    """
    def dphi(r):
        gv = Q.g(r)
        return 1.0 / (r * math.sqrt(gv)) if gv > 0 else math.inf

    def advance(a, b):
        return quad(dphi, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0] * (1 if b > a else -1)

    max_step = 2 * math.pi / 1024
    log_step = min(first_step, 0.02)
    rs, phis = [r0], [0.0]
    r, phi = r0, 0.0
    while True:
        nxt = r * math.exp(direction * log_step)
        if (direction > 0 and nxt >= r_limit) or (direction < 0 and nxt <= r_limit):
            nxt = r_limit
        d = advance(r, nxt)
        if not math.isfinite(d) or d > max_step:
            if log_step < 1e-9:
                break
            log_step /= 2
            continue
        if phi + d >= phi_budget:
            target = phi_budget - phi
            r_end = brentq(lambda x: advance(r, x) - target, min(r, nxt), max(r, nxt), xtol=1e-15 * r, rtol=1e-15)
            rs.append(r_end)
            phis.append(phi_budget)
            break
        r, phi = nxt, phi + d
        rs.append(r)
        phis.append(phi)
        if r == r_limit:
            break
        if d < max_step / 4:
            log_step = min(log_step * 1.25, 0.02)
    return np.array(rs), np.array(phis)


def pedal_to_polar(e: PedalEquation, r_start: float, span: float = 1.0, branch: int = 1,
                   root_index: Optional[int] = None, samples_per_segment: int = 256) -> PolarPath:
    """Reconstruct a polar curve (phi0 = 0) from a pedal equation.

    ``span`` is the number of revolutions of phi to cover, ``branch`` the
    initial direction of r (+1 outward, -1 inward).
    """
    Q = _QOfR(e, root_index)
    r_start = float(r_start)
    if _is_concentric(Q, r_start):
        phi = np.linspace(0.0, 2 * math.pi * span, max(2, int(512 * span)) + 1)
        return PolarPath(np.full_like(phi, r_start), phi, [], abs(span - round(span)) < 1e-12 and span >= 1,
                         np.full_like(phi, r_start))
    g0 = Q.g(r_start)
    if not math.isnan(g0) and abs(g0) <= 1e-12:
        # starting on an apsis
        nudged = r_start * (1 + 1e-7 * branch)
        gn = Q.g(nudged)
        if math.isnan(gn) or gn <= 0:
            other = Q.g(r_start * (1 - 1e-7 * branch))
            if math.isnan(other) or other <= 0:
                # isolated admissible radius: a circle about the pedal point
                phi = np.linspace(0.0, 2 * math.pi, 513)
                return PolarPath(np.full_like(phi, r_start), phi, [], True, np.full_like(phi, r_start))
            branch = -branch
            nudged = r_start * (1 + 1e-7 * branch)
        if branch > 0:
            lo, hi = r_start, _find_apsis(Q, nudged, +1)
        else:
            lo, hi = _find_apsis(Q, nudged, -1), r_start
    elif math.isnan(g0) or g0 < 0:
        raise StartOutsideRegion(f"r = {r_start} is outside the admissible region (r^2 q - 1 = {g0})")
    else:
        lo = _find_apsis(Q, r_start, -1)
        hi = _find_apsis(Q, r_start, +1)
    budget = 2 * math.pi * span
    n = samples_per_segment

    rs, phis, marks = [], [], []
    closed = False

    def emit(r, phi, offset):
        if rs:
            r, phi = r[1:], phi[1:]
        rs.append(r)
        phis.append(phi + offset)

    if lo is not None and hi is not None:
        # oscillation between two apsides
        r_up, phi_up, delta = _segment(Q, lo, hi, n)
        ratio = 2 * delta / (2 * math.pi)
        closed = abs(ratio - round(ratio)) < 1e-6
        # partial segment from r_start to the apsis ahead
        seg_r, seg_phi, _ = _segment(Q, r_start, hi if branch > 0 else lo, n, a_apsis=abs(g0) <= 1e-12)
        emit(seg_r, seg_phi, 0.0)
        offset = float(seg_phi[-1])
        direction = -branch
        period = 2 * delta
        target = budget
        if closed and period <= budget + 1e-9:
            target = period
        last = None
        while offset < target - 1e-12:
            marks.append(sum(len(x) for x in rs) - 1)
            if direction > 0:
                emit(r_up, phi_up, offset)
                last = (lo, hi, offset)
            else:
                emit(r_up[::-1], delta - phi_up[::-1], offset)
                last = (hi, lo, offset)
            offset += delta
            direction = -direction
        r_all = np.concatenate(rs)
        phi_all = np.concatenate(phis)
        keep = phi_all < target - 1e-12
        r_all, phi_all = r_all[keep], phi_all[keep]
        if closed and target == period:
            r_end = r_start
        elif last is not None and offset > target:
            r_end = _segment_radius(Q, last[0], last[1], target - last[2])
        else:
            r_end = float(np.interp(target, phis[-1], rs[-1])) if offset <= target else r_start
        r_all = np.append(r_all, r_end)
        phi_all = np.append(phi_all, target)
        marks = [m for m in marks if m < r_all.size - 1]
        return PolarPath(r_all, phi_all, marks, closed, 1.0 / np.sqrt([Q(x) for x in r_all]))

    # at most one apsis: run toward it (if it lies in the branch direction), then free
    r_far = r_start * 1e4
    r_near = r_start * 1e-6
    offset = 0.0
    direction = branch
    current = r_start
    if (direction < 0 and lo is not None) or (direction > 0 and hi is not None):
        aps = lo if direction < 0 else hi
        seg_r, seg_phi, _ = _segment(Q, aps, current, n, b_apsis=False)
        seg_r, seg_phi = seg_r[::-1], seg_phi[-1] - seg_phi[::-1]
        emit(seg_r, seg_phi, 0.0)
        offset = float(seg_phi[-1])
        marks.append(seg_r.size - 1)
        current = aps
        direction = -direction
        # leave the apsis along a quadrature segment to a regular point
        nxt = current * (1.5 if direction > 0 else 1 / 1.5)
        if (direction > 0 and hi is not None and nxt >= hi) or (direction < 0 and lo is not None and nxt <= lo):
            nxt = 0.5 * (current + (hi if direction > 0 else lo))
        seg_r, seg_phi, _ = _segment(Q, current, nxt, n, b_apsis=False)
        emit(seg_r, seg_phi, offset)
        offset += float(seg_phi[-1])
        current = nxt
    limit = r_far if direction > 0 else r_near
    remaining = budget - offset
    if remaining > 0:
        first = abs(math.log(rs[-1][-1] / rs[-1][-2])) if rs and len(rs[-1]) > 1 else 0.02
        fr, fp = _free_run(Q, current, direction, remaining, limit, first)
        emit(fr, fp, offset)
    r_all = np.concatenate(rs)
    phi_all = np.concatenate(phis)
    return PolarPath(r_all, phi_all, marks, False, 1.0 / np.sqrt([Q(x) for x in r_all]))
