"""Force problems in pedal coordinates.

For the planar system ``x'' = F'(|x|^2) x + 2 G'(|x|^2) x'^perp`` the quantities
``L = x . x'^perp + G(|x|^2)`` and ``c = |x'|^2 - F(|x|^2)`` are conserved and the
orbit satisfies ``(L - G(r^2))^2 / p^2 = F(r^2) + c``. ``perp`` is the
counterclockwise rotation by 90 degrees; only ``L^2`` reaches the equation.

This module builds that equation, integrates orbits to check it, analyses the
admissible radii ``(L - G)^2 / r^2 <= F + c`` with exact root isolation, and
realizes the nonlocal radial transforms numerically along a trajectory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from .errors import (DegenerateAngularTerm, DomainError, InvalidParam, NonMonotonePhase,
                     NotPolynomializable, SingularityReached, StepFailure, TangentThroughOrigin,
                     VerticalTangentInPR)
from .expr import PedalEquation, PowerSum, coerce, ps_eval
from .paths import PolarPath
from .rootfind import exact, isolate_positive_roots, peval, sign_variation

SINGULAR_FRACTION = 1e-9
SAMPLES_PER_REV = 512


def perp(v):
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True)
class ForceSpec:
    """Central potential F and Lorentz-like potential G, both power sums in s = r^2."""

    F: PowerSum = field(default_factory=PowerSum)
    G: PowerSum = field(default_factory=PowerSum)

    def __post_init__(self):
        object.__setattr__(self, "_dF", _compile(self.F.derivative()))
        object.__setattr__(self, "_dG", _compile(self.G.derivative()))
        object.__setattr__(self, "_F", _compile(self.F))
        object.__setattr__(self, "_G", _compile(self.G))

    def F_of(self, s):
        return self._F(s)

    def G_of(self, s):
        return self._G(s)

    def acceleration(self, x, v):
        s = x[0] * x[0] + x[1] * x[1]
        a = self._dF(s) * np.asarray(x) + 2.0 * self._dG(s) * np.array([-v[1], v[0]])
        return a


def _compile(ps: PowerSum):
    es = np.array([float(e) for e in ps.exponents()])
    ks = np.array([float(k) for _, k in ps.items()])
    if es.size == 0:
        return lambda s: 0.0 * np.asarray(s, dtype=float)
    return lambda s: np.sum(ks * np.power.outer(np.asarray(s, dtype=float), es), axis=-1)


@dataclass(frozen=True)
class OrbitConstants:
    L: float
    c: float


def force_to_pedal(fs: ForceSpec, L, c) -> PedalEquation:
    """(L - G(r^2))^2 q = F(r^2) + c as a canonical pedal equation."""
    L, c = coerce(L), coerce(c)
    ang = (PowerSum.const(L) - fs.G.scale_exponents(2)) ** 2
    if ang.is_zero():
        raise DegenerateAngularTerm("(L - G(r^2))^2 vanishes identically")
    rhs = fs.F.scale_exponents(2) + PowerSum.const(c)
    return PedalEquation([-rhs, ang])


def conserved_quantities(x, v, fs: ForceSpec) -> OrbitConstants:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    s = float(x @ x)
    if s == 0:
        raise DomainError("conserved quantities undefined at the origin")
    L = float(x @ perp(v)) + float(fs.G_of(s))
    c = float(v @ v) - float(fs.F_of(s))
    return OrbitConstants(L, c)


# ---------------------------------------------------------------- integration

@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    meta: dict = field(default_factory=dict)
    dense: Optional[object] = None

    @property
    def r(self):
        return np.hypot(self.x[:, 0], self.x[:, 1])

    @property
    def p(self):
        cross = np.abs(self.x[:, 0] * self.v[:, 1] - self.x[:, 1] * self.v[:, 0])
        return cross / np.hypot(self.v[:, 0], self.v[:, 1])

    @property
    def phi(self):
        return np.unwrap(np.arctan2(self.x[:, 1], self.x[:, 0]))

    def state(self, t):
        y = self.dense(t)
        return y[:2], y[2:4]


def integrate_orbit(fs: ForceSpec, x0, v0, t_end: float, tol: float = 1e-10,
                    samples_per_rev: int = SAMPLES_PER_REV, min_samples: int = 1000) -> Trajectory:
    """Adaptive DOP853 integration with dense output.

    Samples are spaced so every revolution gets at least ``samples_per_rev``
    points. The internal tolerance is tightened (down to 1e-3 tol) until the
    relative drift of L and c over the returned samples is at most 10 tol;
    the achieved figure is kept in ``meta["drift"]``. Raises SingularityReached when |x| drops below 1e-9 of its initial
    value.
    """
    if not 1e-13 <= tol <= 1e-3:
        raise InvalidParam("tol must lie in [1e-13, 1e-3]")
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    r0 = float(np.hypot(*x0))
    if r0 == 0:
        raise DomainError("initial position at the origin")
    cutoff = SINGULAR_FRACTION * r0

    def rhs(t, y):
        x, v = y[:2], y[2:]
        a = fs.acceleration(x, v)
        return [v[0], v[1], a[0], a[1]]

    def hit_origin(t, y):
        return math.hypot(y[0], y[1]) - cutoff

    hit_origin.terminal = True
    hit_origin.direction = -1
    scale = max(r0, float(np.hypot(*v0)), 1.0)
    # tighten the internal tolerance until L and c hold to 10 tol at every step
    for shrink in (1.0, 1e-1, 1e-2, 1e-3):
        rtol = max(tol * shrink, 3e-14)
        sol = solve_ivp(rhs, (0.0, float(t_end)), np.concatenate([x0, v0]), method="DOP853",
                        rtol=rtol, atol=rtol * scale * 1e-2, dense_output=True, events=hit_origin)
        if sol.status == 1 and sol.t_events[0].size:
            raise SingularityReached(f"orbit reached |x| < {SINGULAR_FRACTION:g} r0 at t = {sol.t_events[0][0]:.6g}")
        if sol.status == -1:
            rmin = float(np.min(np.hypot(sol.y[0], sol.y[1])))
            if rmin < 1e-3 * r0:
                raise SingularityReached(f"step size collapsed near the origin (|x| = {rmin:.3g})")
            raise StepFailure(sol.message)
        ts = _sample_times(sol, samples_per_rev, min_samples)
        ys = sol.sol(ts)
        tr = Trajectory(ts, ys[:2].T.copy(), ys[2:].T.copy(), dense=sol.sol)
        worst = max(drift(tr, fs))
        if worst <= 10 * tol or rtol == 3e-14:
            break
    tr.meta = {"tol": tol, "rtol": rtol, "drift": worst, "nfev": int(sol.nfev), "steps": int(sol.t.size - 1)}
    return tr


def _sample_times(sol, per_rev, min_samples):
    steps = sol.t
    ang = np.unwrap(np.arctan2(sol.y[1], sol.y[0]))
    dphi = np.abs(np.diff(ang))
    out = [steps[:1]]
    for i in range(steps.size - 1):
        n = max(1, int(math.ceil(dphi[i] * per_rev / (2 * math.pi))))
        out.append(np.linspace(steps[i], steps[i + 1], n + 1)[1:])
    ts = np.concatenate(out)
    if ts.size < min_samples:
        ts = np.union1d(ts, np.linspace(steps[0], steps[-1], min_samples))
    return ts


def drift(tr: Trajectory, fs: ForceSpec) -> Tuple[float, float]:
    """Maximum relative change of L and c along the trajectory.

    Changes are measured against the larger of the constant itself and the
    terms that sum to it, so an orbit with c = 0 still gets a finite figure.
    """
    k0 = conserved_quantities(tr.x[0], tr.v[0], fs)
    s = np.sum(tr.x ** 2, axis=1)
    mom, g = np.sum(tr.x * perp(tr.v), axis=1), np.broadcast_to(fs.G_of(s), s.shape)
    kin, f = np.sum(tr.v ** 2, axis=1), np.broadcast_to(fs.F_of(s), s.shape)
    scale_l = max(abs(k0.L), float(np.max(np.abs(mom))), float(np.max(np.abs(g))), 1e-300)
    scale_c = max(abs(k0.c), float(np.max(kin)), float(np.max(np.abs(f))), 1e-300)
    dl = float(np.max(np.abs(mom + g - k0.L))) / scale_l
    dc = float(np.max(np.abs(kin - f - k0.c))) / scale_c
    return dl, dc


def pedal_residual(tr: Trajectory, e: PedalEquation) -> dict:
    """Relative residual of the pedal equation at every trajectory sample."""
    r = tr.r
    p = tr.p
    if np.any(p < 1e-12 * r):
        raise TangentThroughOrigin("tangent passes through the pedal point (p = 0)")
    res = _equation_residuals(e, r, 1.0 / p ** 2)
    return {"max_rel": float(np.max(res)), "rms": float(np.sqrt(np.mean(res ** 2))), "per_sample": res}


def _equation_residuals(e: PedalEquation, r, q):
    r = np.asarray(r, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(r <= 0):
        raise DomainError("pedal equation evaluated at r <= 0")
    parts = np.array([_compile(c)(r) * q ** j for j, c in enumerate(e.coeffs)])
    # backward-error scale: the size of the individual monomials that cancel
    sizes = np.array([_compile(PowerSum({ex: abs(k) for ex, k in c.items()}))(r) * q ** j
                      for j, c in enumerate(e.coeffs)])
    scale = np.sum(sizes, axis=0)
    scale[scale == 0] = 1.0
    return np.abs(parts.sum(axis=0)) / scale


def equation_residuals(e: PedalEquation, r, p):
    return _equation_residuals(e, r, 1.0 / np.asarray(p, dtype=float) ** 2)


# ---------------------------------------------------------------- regions

@dataclass
class RegionReport:
    h: PowerSum
    m: int
    coeffs: List[Fraction]
    nu: int
    roots: List[Tuple[float, Tuple[float, float], int]]
    admissible_intervals: List[Tuple[float, float]]
    N: int

    def contains(self, r: float, slack: float = 1e-9) -> bool:
        for lo, hi in self.admissible_intervals:
            if lo * (1 - slack) - slack <= r <= hi * (1 + slack) + slack:
                return True
        return False

    def to_dict(self):
        return {
            "h": self.h.render(),
            "substitution_power": self.m,
            "coefficients": [float(c) for c in self.coeffs],
            "nu": self.nu,
            "N": self.N,
            "roots": [{"value": v, "bracket": [float(a), float(b)], "multiplicity": k}
                      for v, (a, b), k in self.roots],
            "intervals": [[lo, None if math.isinf(hi) else hi] for lo, hi in self.admissible_intervals],
        }


def admissibility_function(e: PedalEquation) -> PowerSum:
    """h = -N0 r^2 - N1 with the lowest power of r factored out; p <= r iff h >= 0."""
    if e.degree != 1:
        raise NotPolynomializable("region analysis needs an equation of degree one in q")
    h = -(e[0].shift(2)) - e[1]
    if h.is_zero():
        return h
    return h.shift(-h.min_exponent())


def allowed_region(e: PedalEquation) -> RegionReport:
    """Radii where the curve can live, via exact positive-root isolation of h."""
    h = admissibility_function(e)
    if h.is_zero():
        return RegionReport(h, 1, [], 0, [], [(0.0, math.inf)], 0)
    m = 1
    for ex in h.exponents():
        m = lcm(m, ex.denominator)
    poly = {}
    for ex, k in h.items():
        poly[int(ex * m)] = k
    coeffs = exact([poly.get(i, 0) for i in range(max(poly) + 1)])
    nu = sign_variation(coeffs)
    u_roots = isolate_positive_roots(coeffs)
    roots = [(v ** m, (float(lo) ** m, float(hi) ** m), k) for v, (lo, hi), k in u_roots]
    N = sum(k for _, _, k in roots)
    # sign of h between consecutive roots, tested exactly in u
    cuts = [Fraction(0)] + [(lo + hi) / 2 for _, (lo, hi), _ in u_roots]
    intervals = []
    bounds = [0.0] + [v for v, _, _ in roots] + [math.inf]
    for i in range(len(bounds) - 1):
        lo_u = cuts[i]
        hi_u = cuts[i + 1] if i + 1 < len(cuts) else None
        probe = (lo_u + hi_u) / 2 if hi_u is not None else lo_u + 1
        if peval(coeffs, probe) >= 0:
            if intervals and intervals[-1][1] == bounds[i]:
                intervals[-1] = (intervals[-1][0], bounds[i + 1])
            else:
                intervals.append((bounds[i], bounds[i + 1]))
    # a root where h touches zero from below is an isolated admissible radius (a circle)
    for v, _, k in roots:
        if not any(lo <= v <= hi for lo, hi in intervals):
            intervals.append((v, v))
    intervals.sort()
    return RegionReport(h, m, coeffs, nu, roots, intervals, N)


# ---------------------------------------------------------------- transforms

def _map_functions(f):
    kind = f[0]
    if kind == "power":
        c, g = float(f[1]), float(f[2])
        return (lambda r: c * r ** g, lambda r: c * g * r ** (g - 1), lambda y: (y / c) ** (1 / g))
    if kind == "moebius":
        a, b = float(f[1]), float(f[2])
        return (lambda r: a * r / (1 - b * r), lambda r: a / (1 - b * r) ** 2, lambda y: y / (a + b * y))
    raise InvalidParam(f"unknown radial map {kind!r}")


def transform_trajectory(tr: Trajectory, f, k: float = 1.0) -> PolarPath:
    """Numeric nonlocal transform of an orbit.

    For ``f = ("power", c, gamma)`` or ``("moebius", a, b)`` the new radius r~
    solves f(r~) = r and the new angle accumulates
    ``dphi~ = k f(r~)^2 / (f'(r~) r~^2) dphi``; this is the pointwise form of
    the equation rule h(f(r), k^2 q - k^2/r^2 + 1/f(r)^2).
    For ``f = ("rotating", w)`` the radius is kept and ``dphi~ = (1 + w r^2) dphi``,
    the pointwise form of A_w (a rotating frame when w = omega/L).

    Angles start at the first sample, so the output is defined up to rotation.
    """
    k = float(k)
    r_o = tr.r
    x, v = tr.x, tr.v
    omega_o = (x[:, 0] * v[:, 1] - x[:, 1] * v[:, 0]) / r_o ** 2
    rdot_o = np.sum(x * v, axis=1) / r_o
    sig = np.sign(omega_o[np.abs(omega_o) > 1e-12 * np.max(np.abs(omega_o))])
    if sig.size and np.any(sig != sig[0]):
        raise NonMonotonePhase("polar angle is not monotone along the trajectory")

    if f[0] == "rotating":
        w = float(f[1])
        r_n = r_o
        rate = lambda rr: 1.0 + w * rr ** 2  # noqa: E731
        rdot_n = rdot_o
        ratio = rate(r_n)
    else:
        fn, dfn, finv = _map_functions(f)
        r_n = finv(r_o)
        rate = None
        ratio = k * fn(r_n) ** 2 / (dfn(r_n) * r_n ** 2)
        rdot_n = rdot_o / dfn(r_n)

    omega_n = ratio * omega_o
    phi_n = _accumulate_phase(tr, f, k)
    p_n = r_n ** 2 * np.abs(omega_n) / np.sqrt(rdot_n ** 2 + r_n ** 2 * omega_n ** 2)
    marks = [int(i) + 1 for i in np.nonzero(np.diff(np.sign(rdot_o)) != 0)[0]]
    return PolarPath(r_n, phi_n, marks, False, p_n)


def _accumulate_phase(tr: Trajectory, f, k):
    """Integrate dphi~/dt along the dense trajectory (cumulative, high accuracy)."""
    if f[0] == "rotating":
        w = float(f[1])

        def ratio(rr):
            return 1.0 + w * rr * rr
    else:
        fn, dfn, finv = _map_functions(f)

        def ratio(rr):
            rn = finv(rr)
            return k * fn(rn) ** 2 / (dfn(rn) * rn * rn)

    def dphi(t, y):
        s = tr.dense(t)
        xx, yy, vx, vy = s[0], s[1], s[2], s[3]
        rr2 = xx * xx + yy * yy
        return [ratio(math.sqrt(rr2)) * (xx * vy - yy * vx) / rr2]

    if tr.dense is None:
        from scipy.integrate import cumulative_simpson

        r = tr.r
        omega = (tr.x[:, 0] * tr.v[:, 1] - tr.x[:, 1] * tr.v[:, 0]) / r ** 2
        return cumulative_simpson(ratio(r) * omega, x=tr.t, initial=0.0)
    sol = solve_ivp(dphi, (tr.t[0], tr.t[-1]), [0.0], method="DOP853", rtol=1e-12, atol=1e-13,
                    t_eval=tr.t)
    return sol.y[0]


# ---------------------------------------------------------------- geometry

def curvature_radius(e: PedalEquation, r: float, root_index: Optional[int] = None) -> float:
    """rho = r dr/dp by implicit differentiation of sum_j N_j(r) p^(-2j) = 0."""
    q = e.solve_q(r, root_index)
    if not q > 0 or math.isnan(q):
        raise DomainError(f"no real p at r = {r}")
    p = 1.0 / math.sqrt(q)
    E_r = sum(ps_eval(c.derivative(), r) * q ** j for j, c in enumerate(e.coeffs))
    E_p = sum(ps_eval(c, r) * (-2 * j) * p ** (-2 * j - 1) for j, c in enumerate(e.coeffs))
    scale = max(abs(ps_eval(c, r)) * q ** j for j, c in enumerate(e.coeffs)) or 1.0
    tiny = 1e-13 * scale
    if abs(E_r) * r <= tiny and abs(E_p) * p <= tiny:
        raise VerticalTangentInPR("both partial derivatives vanish; dr/dp undefined")
    if abs(E_r) * r <= tiny:
        return math.inf
    return r * (-E_p / E_r)


def _polyline_distances(pts, poly):
    """Distance from each point to the polyline through ``poly`` (ordered vertices)."""
    # several candidate vertices: self-intersecting curves put the nearest
    # vertex on the wrong branch
    tree = cKDTree(poly)
    _, nbrs = tree.query(pts, k=min(16, len(poly)))
    nbrs = np.atleast_2d(nbrs.T).T if nbrs.ndim == 1 else nbrs
    best = np.full(len(pts), np.inf)
    for col in range(nbrs.shape[1]):
        idx = nbrs[:, col]
        for off in (-1, 0):
            i0 = np.clip(idx + off, 0, len(poly) - 2)
            a, b = poly[i0], poly[i0 + 1]
            ab = b - a
            t = np.clip(np.sum((pts - a) * ab, axis=1) / np.maximum(np.sum(ab * ab, axis=1), 1e-300), 0, 1)
            d = np.hypot(*(pts - (a + t[:, None] * ab)).T)
            best = np.minimum(best, d)
    return best


def hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(max(np.max(_polyline_distances(a, b)), np.max(_polyline_distances(b, a))))


def rotate(points, angle):
    c, s = math.cos(angle), math.sin(angle)
    pts = np.asarray(points, dtype=float)
    return pts @ np.array([[c, s], [-s, c]])


def hausdorff_after_rotation(a, b, grid: int = 360) -> Tuple[float, float]:
    """Smallest Hausdorff distance over rotations of ``a`` about the origin.

    Returns (distance, angle). A coarse grid picks the basin, Brent refines it.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sub_a = a[:: max(1, len(a) // 400)]
    sub_b = b[:: max(1, len(b) // 400)]
    angles = np.linspace(-math.pi, math.pi, grid, endpoint=False)
    coarse = [hausdorff(rotate(sub_a, t), sub_b) for t in angles]
    t0 = angles[int(np.argmin(coarse))]
    step = 2 * math.pi / grid
    res = minimize_scalar(lambda t: hausdorff(rotate(a, t), b), bounds=(t0 - step, t0 + step),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.fun), float(res.x)


def diameter(points) -> float:
    pts = np.asarray(points, dtype=float)
    from scipy.spatial import ConvexHull

    hull = pts[ConvexHull(pts).vertices] if len(pts) > 3 else pts
    d = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))
