"""Derivative-chain calculus.

Chain symbols ``D_k = (p_c d/dp)**k p`` describe a curve by an equation in
``p, p_c, p_c p_c', ...``. An autonomous polar ODE in ``r, |r'|, r'', |r'''|, ...``
is the pedal of the curve whose chain equation has the same shape with
``r^(k) -> D_k``. The evolute shifts every index down by one.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (ExprSyntaxError, NonIntegerExponent, NotReducibleToQ, NotShiftable,
                     OddFirstDerivative)
from .expr import ChainEquation, PedalEquation, PowerSum, PRSum, coerce, is_exact
from .parser import Parser
from .transforms import inverse_pedal_transform, named_transform, pedal_transform

MAX_ORDER = 12


# ------------------------------------------------------------ ODE ingestion

def _deriv_names(n=MAX_ORDER):
    return ["r"] + [f"r{k}" for k in range(n + 1)]


def _index(name: str) -> int:
    return 0 if name == "r" else int(name[1:])


def _eval_chain(node, width):
    """Fold an AST into a ChainEquation over 2*width slots.

    Slot k < width is |r^(k)| (or r^(k) for even k); slot width + k holds a bare
    odd derivative, which is only legal in even powers.
    """
    kind = node[0]
    if kind in ("num",):
        return ChainEquation.const(node[1])
    if kind == "const":
        return ChainEquation.const(node[2])
    if kind == "var":
        k = _index(node[1])
        return ChainEquation.symbol(width + k if k % 2 else k)
    if kind == "call":
        if node[1] != "abs":
            raise ExprSyntaxError(f"unknown function {node[1]!r}")
        inner = node[2]
        if inner[0] != "var":
            raise OddFirstDerivative("abs() must wrap a single derivative symbol")
        return ChainEquation.symbol(_index(inner[1]))
    if kind == "neg":
        return -_eval_chain(node[1], width)
    if kind == "pow":
        e = node[2]
        if e.denominator != 1 or e < 0:
            raise NonIntegerExponent("chain equations need nonnegative integer powers")
        return _eval_chain(node[1], width) ** int(e)
    a = _eval_chain(node[1], width)
    b = _eval_chain(node[2], width)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        consts = list(b.items())
        if len(consts) != 1 or any(consts[0][0]):
            raise ExprSyntaxError("division allowed only by constants in an ODE")
        k = consts[0][1]
        return a * (Fraction(1) / k if is_exact(k) else 1.0 / k)
    raise ExprSyntaxError(f"bad node {kind}")


def chain_from_polar_ode(text: str, constants: Mapping | None = None) -> ChainEquation:
    """Read ``lhs = rhs`` in r, r1, r2, ... (r1 = dr/dphi) and return the chain equation.

    Odd derivatives must appear as ``abs(r1)`` / ``|r1|`` or only in even powers.
    """
    parser = Parser(text, variables=_deriv_names(), constants=constants, functions=("abs",))
    lhs, rhs = parser.parse_equation()
    width = MAX_ORDER + 1
    poly = _eval_chain(lhs, width) - _eval_chain(rhs, width)
    terms = {}
    for key, k in poly.items():
        key = list(key) + [0] * (2 * width - len(key))
        for j in range(width):
            raw = key[width + j]
            if raw:
                if raw % 2:
                    raise OddFirstDerivative(f"r{j} appears to an odd power outside abs()")
                key[j] += raw
        terms[tuple(key[:width])] = terms.get(tuple(key[:width]), 0) + k
    return ChainEquation(terms)


# ------------------------------------------------------------ conversions

def _square_parity(f: PRSum) -> PRSum:
    even, odd = {}, {}
    for (i, e), k in f.items():
        if i.denominator != 1:
            raise NotReducibleToQ("fractional power of a chain symbol")
        (odd if i.numerator % 2 else even)[(i, e)] = k
    if not odd:
        return f
    ev, od = PRSum._make(even), PRSum._make(odd)
    return ev * ev - od * od


def chain_to_pr(c: ChainEquation) -> PRSum:
    """Equation in D0, D1 only, written in (p, r) using p_c**2 = r**2 - p**2."""
    if c.order > 1:
        raise NotReducibleToQ("chain equation involves derivatives beyond p_c")
    # treat D1 as w, square away odd powers of w, then w**2 -> r**2 - p**2
    f = PRSum({(key[1] if len(key) > 1 else 0, key[0] if key else 0): k for key, k in c.items()})
    f = _square_parity(f)
    w2 = PRSum({(0, 2): 1, (2, 0): -1})
    out = PRSum()
    for (i, e), k in f.items():
        out = out + w2 ** (int(i) // 2) * PRSum({(e, 0): k})
    return out


def chain_to_pedal(c: ChainEquation) -> PedalEquation:
    return chain_to_pr(c).to_pedal()


def polar_ode_to_pedal(c: ChainEquation) -> PedalEquation:
    """Pedal equation of a first-order polar ODE's solution: f(r, r p_c/p) = 0.

    Uses |r'|**2 = r**2 p_c**2/p**2 = r**4 q - r**2.
    """
    if c.order > 1:
        raise NotReducibleToQ("direct pedal form needs a first-order ODE")
    f = PRSum({(key[1] if len(key) > 1 else 0, key[0] if key else 0): k for key, k in c.items()})
    f = _square_parity(f)
    buckets = {}
    for (i, e), k in f.items():
        # (r^4 q - r^2)^n r^e
        n = int(i) // 2
        base = PowerSum({e: k})
        for j in range(n + 1):
            from math import comb
            coeff = comb(n, j) * (-1) ** (n - j)
            term = base.shift(4 * j + 2 * (n - j)) * coeff
            buckets[j] = buckets.get(j, PowerSum()) + term
    d = max(buckets)
    return PedalEquation([buckets.get(j, PowerSum()) for j in range(d + 1)])


def pr_to_chain(f: PRSum) -> ChainEquation:
    """(p, r) equation to chain form with r**2 = D0**2 + D1**2 (odd powers of r squared away)."""
    g = PRSum({(e, i): k for (i, e), k in f.items()})
    g = _square_parity(g)
    r2 = ChainEquation({(2, 0): 1, (0, 2): 1})
    out = ChainEquation({})
    for (i, e), k in g.items():
        if e.denominator != 1 or e < 0 or i.denominator != 1 or i < 0:
            raise NotReducibleToQ("chain form needs nonnegative integer powers")
        out = out + r2 ** (int(i) // 2) * ChainEquation({(int(e),): k})
    return out


# ------------------------------------------------------------ evolute family

def evolute(c: ChainEquation) -> ChainEquation:
    """Shift D_k -> D_{k-1}; the equation must not involve D0."""
    if c.uses(0):
        raise NotShiftable("equation involves D0 = p; the evolute rule needs D1..Dn only")
    return c.shift_down()


def inverse_evolute_shift(c: ChainEquation) -> ChainEquation:
    """D_k -> D_{k+1}: the chain equation of the involute family."""
    return c.shift_up()


@dataclass(frozen=True)
class Involute:
    shifted: ChainEquation
    integrated: ChainEquation | None
    note: str


def inverse_evolute(c: ChainEquation, constant=0) -> Involute:
    """Involute family with a closed form for the worked cases.

    * ``a*D2 + g(D0) = 0`` with g polynomial integrates to
      ``D1**2 = -(2/a) G(D0) + C`` (used by ``p_c = 0`` and the Kepler circle).
    * ``D2**2 + D1**2 = a**2`` integrates to ``(D0 - p0)**2 + D1**2 = a**2``.

    ``constant`` is the integration constant (C or p0).
    """
    shifted = c.shift_up()
    closed = integrate_chain(shifted, constant)
    note = "closed form" if closed is not None else "no closed form; solve numerically"
    return Involute(shifted, closed, note)


def integrate_chain(c: ChainEquation, constant=0) -> ChainEquation | None:
    terms = dict(c.items())
    if c.order != 2:
        return None
    width = 3
    pad = {tuple(list(k) + [0] * (width - len(k))): v for k, v in terms.items()}
    # case a*D2 + g(D0)
    d2_lin = {k: v for k, v in pad.items() if k[2] == 1 and k[0] == 0 and k[1] == 0}
    rest = {k: v for k, v in pad.items() if k not in d2_lin}
    if len(d2_lin) == 1 and all(k[1] == 0 and k[2] == 0 for k in rest):
        a = next(iter(d2_lin.values()))
        out = {(0, 2): 1, (): -coerce(constant)}
        for k, v in rest.items():
            n = k[0]
            val = -2 * v / (n + 1) / a if is_exact(v) and is_exact(a) else -2.0 * float(v) / (n + 1) / float(a)
            out[(n + 1,)] = out.get((n + 1,), 0) - val
        return ChainEquation(out)
    # case D2^2 + D1^2 = a^2 (up to scale)
    if set(pad) <= {(0, 0, 2), (0, 2, 0), (0, 0, 0)} and (0, 0, 2) in pad and (0, 2, 0) in pad:
        s = pad[(0, 0, 2)]
        if pad[(0, 2, 0)] == s:
            a2 = -pad.get((0, 0, 0), 0) / s
            p0 = coerce(constant)
            return ChainEquation({(2,): 1, (1,): -2 * p0, (): p0 * p0 - a2, (0, 2): 1})
    return None


def scale_chain(c: ChainEquation, alpha) -> ChainEquation:
    """S_alpha on a chain equation: every D_k is homogeneous of degree one."""
    alpha = coerce(alpha)
    return ChainEquation({k: v * alpha ** sum(k) for k, v in c.items()})


def contrapedal(c: ChainEquation) -> PedalEquation:
    """Contrapedal = pedal of the evolute."""
    return pedal_transform(chain_to_pr(evolute(c)))


def catacaustic(e: PedalEquation) -> ChainEquation:
    """Catacaustic with radiant at the pedal point: evolute of S_{1/2} of the pedal."""
    half = named_transform("S", Fraction(1, 2)).apply(pedal_transform(e))
    return evolute(pr_to_chain(half.to_pr()))


def anticatacaustic(c: ChainEquation, constant=0) -> PedalEquation:
    """Inverse catacaustic P^-1 S_2 E^-1 for a closed-form involute case."""
    inv = inverse_evolute(c, constant)
    if inv.integrated is None:
        raise NotShiftable("inverse evolute has no closed form for this equation")
    scaled = scale_chain(inv.integrated, 2)
    return inverse_pedal_transform(chain_to_pr(scaled))


def point_chain(a) -> ChainEquation:
    """A point at distance a: D0**2 + D1**2 = a**2."""
    a = coerce(a)
    return ChainEquation({(2,): 1, (0, 2): 1, (): -a * a})


# ------------------------------------------------------------ numerics

def chain_values(S: PowerSum, p, n: int):
    """D_0..D_n at p for a curve with p_c**2 = S(p), using the upper branch p_c >= 0."""
    A = [PowerSum({1: 1})]
    B = [PowerSum()]
    dS = S.derivative()
    for _ in range(n):
        a, b = A[-1], B[-1]
        A.append(dS * b * Fraction(1, 2) + S * b.derivative())
        B.append(a.derivative())
    sq = np.sqrt(S.eval_unchecked(p))
    return [a.eval_unchecked(p) + sq * b.eval_unchecked(p) for a, b in zip(A, B)]


def chain_residual(c: ChainEquation, S: PowerSum, ps: Sequence[float]) -> float:
    worst = 0.0
    for p in ps:
        vals = chain_values(S, p, c.order)
        worst = max(worst, abs(c.evaluate(vals)))
    return worst


def solve_chain_numeric(c: ChainEquation, pc0: float, pc1: float, p0: float = 0.0, root: int = -1,
                        samples: int = 200):
    """Integrate an equation h(D1, D2) = 0 for p as a function of p_c.

    Uses dp/dp_c = p_c / D2 with D2 a real root of h(p_c, .) (root index from
    the sorted real roots). Returns arrays (p_c, p).
    """
    if c.uses(0) or c.order != 2:
        raise NotShiftable("numeric involute solver needs an equation in D1, D2")

    def d2(pc):
        coeffs = {}
        for key, k in c.items():
            key = list(key) + [0] * (3 - len(key))
            coeffs[key[2]] = coeffs.get(key[2], 0.0) + float(k) * pc ** key[1]
        deg = max(coeffs)
        roots = np.roots([coeffs.get(i, 0.0) for i in range(deg, -1, -1)])
        real = sorted(z.real for z in roots if abs(z.imag) < 1e-9)
        return real[root]

    sol = solve_ivp(lambda s, y: [s / d2(s)], (pc0, pc1), [p0], rtol=1e-10, atol=1e-12,
                    dense_output=True)
    grid = np.linspace(pc0, pc1, samples)
    return grid, sol.sol(grid)[0]
