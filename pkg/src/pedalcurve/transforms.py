"""Curve transforms as substitution rules on pedal equations.

Every algebraic transform is a rule ``f(r, q) = 0  ->  f(u/v, (A q + B)/D) = 0``
where ``u, v, A, B, D`` are power sums in the new ``r``. Denominators are
cleared by multiplying the whole equation, which is harmless because the
equation equals zero. The pedal map ``P`` and its relatives act on the ``(p, r)``
form by monomial substitution instead, followed by squaring away odd powers of
``p``.

Each transform also carries a pointwise map ``(r, p) -> (r', p')`` taking a
point of the input curve to the corresponding point of the output curve. The
pointwise maps are used for numeric identities and for the parallel-curve
transform ``Epar``, which has no closed form in ``q``.

``compose([T1, T2])`` applies ``T2`` first, like operator composition.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence, Tuple

import numpy as np

from .errors import ExprSyntaxError, InvalidParam, NonIntegerExponent, NumericOnlyTransform
from .expr import PedalEquation, PowerSum, PRSum, as_exponent, coerce, cpow, is_exact
from .parser import Parser, eval_pr

TAGS = ("S", "I", "M", "H", "Estar", "A", "B", "F", "Epar", "P", "Pinv", "Dual", "Tf", "pipeline")

R = PowerSum.var()
ONE = PowerSum.const(1)


def _inv(x):
    return Fraction(1) / x if is_exact(x) else 1.0 / x


def _exp_param(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return as_exponent(x)


# ------------------------------------------------------------- substitution

def substitute_r(coeffs: Sequence[PowerSum], u: PowerSum, v: PowerSum):
    """Replace r by u/v in every coefficient, clearing a common denominator."""
    v_is_one = v == ONE
    if u.is_monomial() and v_is_one:
        (g, c), = u.items()
        return [n.substitute_power(c, g) for n in coeffs]
    exps = [e for n in coeffs for e in n.exponents()]
    if any(e.denominator != 1 for e in exps) and not (u.is_monomial() and v_is_one):
        raise NonIntegerExponent("rational substitution needs integer exponents")
    m_pos = max([int(e) for e in exps if e > 0], default=0)
    m_neg = max([-int(e) for e in exps if e < 0], default=0)
    out = []
    upow, vpow = {}, {}

    def up(n):
        if n not in upow:
            upow[n] = u ** n
        return upow[n]

    def vp(n):
        if n not in vpow:
            vpow[n] = v ** n
        return vpow[n]

    for n in coeffs:
        acc = PowerSum()
        for e, k in n.items():
            e = int(e)
            if u.is_monomial():
                # u**e is a monomial for any sign of e
                term = (u ** e if e >= 0 else _monomial_pow(u, e)) * (ONE if v_is_one else vp(m_pos - e))
            elif v_is_one:
                term = up(e + m_neg)
            else:
                term = up(e + m_neg) * vp(m_pos - e)
            acc = acc + term * k
        out.append(acc)
    return out


def _monomial_pow(u: PowerSum, e: int) -> PowerSum:
    (g, c), = u.items()
    return PowerSum({g * e: cpow(c, Fraction(e))})


def substitute_q(coeffs: Sequence[PowerSum], A: PowerSum, B: PowerSum, D: PowerSum):
    """Replace q by (A q + B)/D in sum_j N_j q^j and multiply by D^d."""
    d = len(coeffs) - 1
    out = [PowerSum() for _ in range(d + 1)]
    apow = [ONE]
    bpow = [ONE]
    dpow = [ONE]
    for _ in range(d):
        apow.append(apow[-1] * A)
        bpow.append(bpow[-1] * B)
        dpow.append(dpow[-1] * D)
    for j, n in enumerate(coeffs):
        if n.is_zero():
            continue
        base = n * dpow[d - j]
        for i in range(j + 1):
            if B.is_zero() and i != j:
                continue
            out[i] = out[i] + base * apow[i] * bpow[j - i] * comb(j, i)
    return out


def substitute(e: PedalEquation, u=R, v=ONE, A=ONE, B=PowerSum(), D=ONE) -> PedalEquation:
    coeffs = substitute_r(list(e.coeffs), u, v)
    return PedalEquation(substitute_q(coeffs, A, B, D))


# ------------------------------------------------------------- transform spec

@dataclass(frozen=True)
class TransformSpec:
    tag: str
    params: Tuple = ()
    steps: Tuple["TransformSpec", ...] = field(default=())

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InvalidParam(f"unknown transform {self.tag!r}")

    # -- rule pieces (u, v, A, B, D) for the affine-q transforms
    def rule(self):
        t, p = self.tag, self.params
        if t == "S":
            a, = p
            return (R * a, ONE, PowerSum.const(_inv(a) * _inv(a)), PowerSum(), ONE)
        if t == "I":
            rr, = p
            return (PowerSum({-1: rr}), ONE, PowerSum({4: _inv(rr) * _inv(rr)}), PowerSum(), ONE)
        if t == "M":
            a, = p
            return (PowerSum({a: 1}), ONE, PowerSum({2 - 2 * a: 1}), PowerSum(), ONE)
        if t == "H":
            k, = p
            return (R, ONE, PowerSum.const(k * k), PowerSum({-2: 1 - k * k}), ONE)
        if t == "Estar":
            c, = p
            return (R, PowerSum({0: 1, 1: -c}), ONE, PowerSum({-1: -2 * c, 0: c * c}), ONE)
        if t == "A":
            w, = p
            return (R, ONE, PowerSum({0: 1, 2: w}) ** 2, PowerSum({0: -2 * w, 2: -w * w}), ONE)
        if t == "B":
            a, = p
            return (R, ONE, PowerSum({0: 1, 1: a}) ** 2, PowerSum({-1: -2 * a, 0: -a * a}), ONE)
        if t == "F":
            c, = p
            shifted = PowerSum({1: 1, 0: -c})
            return (shifted, ONE, PowerSum({4: 1}), PowerSum({1: -2 * c, 0: c * c}), shifted ** 4)
        if t == "Tf":
            kind, x, y, k = p
            k2 = k * k
            if kind == "power":
                return (PowerSum({y: x}), ONE, PowerSum.const(k2),
                        PowerSum({-2: -k2}) + PowerSum({-2 * y: _inv(x) * _inv(x)}), ONE)
            ia2 = _inv(x) * _inv(x)
            return (R * x, PowerSum({0: 1, 1: -y}), PowerSum.const(k2),
                    PowerSum({-2: ia2 - k2, -1: -2 * y * ia2, 0: y * y * ia2}), ONE)
        return None

    def apply(self, e: PedalEquation) -> PedalEquation:
        return apply_transform(self, e)

    def point_map(self, r, p):
        return point_map(self, r, p)

    def label(self) -> str:
        if self.tag == "pipeline":
            return " * ".join(s.label() for s in self.steps)
        if not self.params:
            return self.tag
        return f"{self.tag}({', '.join(str(x) for x in self.params)})"


def named_transform(tag: str, *params) -> TransformSpec:
    """Build a transform from its tag and parameters.

    Tags and parameters: ``S(alpha)``, ``I(R)``, ``M(alpha)``, ``H(k)``,
    ``Estar(c)``, ``A(omega)``, ``B(alpha)``, ``F(c)``, ``Epar(c)``, ``P``,
    ``Pinv``, ``Dual(R)``, ``Tf("power", c, gamma, k)`` for f = c*r**gamma and
    ``Tf("moebius", a, b, k)`` for f = a*r/(1 - b*r).
    """
    if tag not in TAGS or tag == "pipeline":
        raise InvalidParam(f"unknown transform {tag!r}")
    arity = {"S": 1, "I": 1, "M": 1, "H": 1, "Estar": 1, "A": 1, "B": 1, "F": 1, "Epar": 1,
             "P": 0, "Pinv": 0, "Dual": 1, "Tf": 4}[tag]
    if tag == "Dual" and not params:
        params = (1,)
    if len(params) != arity:
        raise InvalidParam(f"{tag} takes {arity} parameter(s), got {len(params)}")
    if tag == "Tf":
        kind = params[0]
        if kind not in ("power", "moebius"):
            raise InvalidParam("Tf map must be 'power' or 'moebius'")
        x, y, k = coerce(params[1]), coerce(params[2]), coerce(params[3])
        if kind == "power":
            y = _exp_param(y)
            if x <= 0 or y == 0:
                raise InvalidParam("power map needs c > 0 and gamma != 0")
        elif x == 0:
            raise InvalidParam("moebius map needs a != 0")
        if k == 0:
            raise InvalidParam("k must be nonzero")
        return TransformSpec("Tf", (kind, x, y, k))
    vals = tuple(coerce(x) for x in params)
    if tag == "M":
        vals = (_exp_param(vals[0]),)
        if vals[0] == 0:
            raise InvalidParam("M needs alpha != 0")
    if tag in ("I", "Dual") and not vals[0] > 0:
        raise InvalidParam(f"{tag} needs R > 0")
    if tag == "S" and not vals[0] > 0:
        raise InvalidParam("S needs alpha > 0")
    if tag == "H" and vals[0] == 0:
        raise InvalidParam("H needs k != 0")
    return TransformSpec(tag, vals)


def compose(transforms: Sequence[TransformSpec]) -> TransformSpec:
    """Pipeline applying the rightmost transform first."""
    if not transforms:
        raise InvalidParam("empty composition")
    steps = []
    for t in transforms:
        steps.extend(t.steps if t.tag == "pipeline" else (t,))
    return TransformSpec("pipeline", (), tuple(steps))


def apply_transform(t: TransformSpec, e: PedalEquation) -> PedalEquation:
    if t.tag == "pipeline":
        for step in reversed(t.steps):
            e = apply_transform(step, e)
        return e
    if t.tag == "Epar":
        raise NumericOnlyTransform("the parallel curve has no closed pedal form; use point_map")
    if t.tag in ("P", "Pinv", "Dual"):
        return _apply_monomial_pr(t, e.to_pr())
    u, v, A, B, D = t.rule()
    return substitute(e, u, v, A, B, D)


def _apply_monomial_pr(t: TransformSpec, f: PRSum) -> PedalEquation:
    # maps are (coeff, p-exponent, r-exponent) replacing p and r
    if t.tag == "P":
        g = f.substitute((1, 0, 1), (1, -1, 2))
    elif t.tag == "Pinv":
        g = f.substitute((1, 2, -1), (1, 1, 0))
    else:
        rr, = t.params
        g = f.substitute((rr, 0, -1), (rr, -1, 0))
    return g.to_pedal()


def pedal_transform(e) -> PedalEquation:
    """Pedal curve: f(p, r) = 0 becomes f(r, r**2/p) = 0.

    Accepts a :class:`PRSum` (the unsquared ``(p, r)`` form, e.g. ``2Rp - r**2``)
    or a :class:`PedalEquation`.
    """
    f = e if isinstance(e, PRSum) else e.to_pr()
    return _apply_monomial_pr(TransformSpec("P"), f)


def inverse_pedal_transform(e) -> PedalEquation:
    f = e if isinstance(e, PRSum) else e.to_pr()
    return _apply_monomial_pr(TransformSpec("Pinv"), f)


def t_f_transform(e: PedalEquation, f: Tuple, k) -> PedalEquation:
    """Nonlocal transform h(f(r), k**2 q - k**2/r**2 + 1/f(r)**2) = 0.

    ``f`` is ``("power", c, gamma)`` or ``("moebius", a, b)``.
    """
    return apply_transform(named_transform("Tf", f[0], f[1], f[2], k), e)


# ------------------------------------------------------------- point maps

def point_map(t: TransformSpec, r, p):
    """Map points (r, p) of an input curve to the transformed curve."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(p, dtype=float)
    tag = t.tag
    if tag == "pipeline":
        for step in reversed(t.steps):
            r, p = point_map(step, r, p)
        return r, p
    f = [float(x) if not isinstance(x, str) else x for x in t.params]
    if tag == "S":
        return r / f[0], p / f[0]
    if tag == "I":
        return f[0] / r, f[0] * p / r ** 2
    if tag == "M":
        a = f[0]
        rn = r ** (1.0 / a)
        return rn, p / rn ** (a - 1)
    if tag == "P":
        return p, p ** 2 / r
    if tag == "Pinv":
        return r ** 2 / p, r
    if tag == "Dual":
        r1, p1 = p, p ** 2 / r
        return f[0] / r1, f[0] * p1 / r1 ** 2
    if tag == "Epar":
        c = f[0]
        return np.sqrt(r ** 2 + 2 * p * c + c ** 2), p + c
    q = 1.0 / p ** 2
    if tag == "H":
        k = f[0]
        rn, qn = r, (q + (k * k - 1) / r ** 2) / (k * k)
    elif tag == "Estar":
        c = f[0]
        rn = r / (1 + c * r)
        qn = q + 2 * c / rn - c * c
    elif tag == "F":
        c = f[0]
        rn = r + c
        qn = (q * r ** 4 + 2 * c * rn - c * c) / rn ** 4
    elif tag == "A":
        w = f[0]
        rn, qn = r, (q + 2 * w + w * w * r ** 2) / (1 + w * r ** 2) ** 2
    elif tag == "B":
        a = f[0]
        rn, qn = r, (q + 2 * a / r + a * a) / (1 + a * r) ** 2
    elif tag == "Tf":
        kind, x, y, k = t.params
        x, y, k = float(x), float(y), float(k)
        rn = (r / x) ** (1.0 / y) if kind == "power" else r / (x + y * r)
        qn = (q - 1.0 / r ** 2 + k * k / rn ** 2) / (k * k)
    else:
        raise InvalidParam(f"no point map for {tag}")
    return rn, 1.0 / np.sqrt(qn)


# ------------------------------------------------------------- pipeline text

_CALL = re.compile(r"\s*([A-Za-z]+)\s*(?:\(([^()]*)\))?\s*")


def _const_value(text: str, constants: Mapping | None):
    node = Parser(text, variables=(), constants=constants).parse_expression()
    val = eval_pr(node, {})
    items = list(val.num.items())
    if val.den != PRSum.const(1) or len(items) > 1 or (items and items[0][0] != (0, 0)):
        raise ExprSyntaxError(f"parameter {text!r} is not a constant")
    return items[0][1] if items else Fraction(0)


def parse_pipeline(text: str, constants: Mapping | None = None) -> TransformSpec:
    """Parse ``"H(2) * Estar(-1/2) * S(3)"``; ``*`` composes, rightmost first."""
    parts = _split_top(text)
    specs = []
    for part in parts:
        m = _CALL.fullmatch(part)
        if not m:
            raise ExprSyntaxError(f"cannot read transform {part.strip()!r}", expected="Name(args)")
        name, args = m.group(1), m.group(2)
        raw = [a for a in re.split(r"[,\s]+", args.strip())] if args and args.strip() else []
        if name == "Tf":
            if len(raw) != 4:
                raise InvalidParam("Tf takes (power|moebius, x, y, k)")
            params = [raw[0]] + [_const_value(a, constants) for a in raw[1:]]
        else:
            params = [_const_value(a, constants) for a in raw]
        if name not in TAGS or name == "pipeline":
            raise InvalidParam(f"unknown transform {name!r}")
        specs.append(named_transform(name, *params))
    return specs[0] if len(specs) == 1 else compose(specs)


def _split_top(text: str):
    depth, cur, out = 0, "", []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    if any(not s.strip() for s in out):
        raise ExprSyntaxError("empty transform in pipeline", expected="Name(args)")
    return out
