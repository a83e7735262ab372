"""Exact power-sum algebra and pedal equations.

A :class:`PowerSum` is a finite sum ``sum_i c_i r**e_i`` with exact rational
exponents. Coefficients are :class:`fractions.Fraction` when they came from
exact input and ``float`` otherwise; the two mix freely (a float anywhere in a
product makes the result float).

A :class:`PedalEquation` is ``sum_j N_j(r) q**j = 0`` with ``q = 1/p**2``. It is
always held in canonical form: no leading/trailing zero coefficients and the
smallest exponent across all ``N_j`` equal to zero.

:class:`PRSum` is the bivariate helper used for equations written in ``p`` and
``r`` before they are squared into ``q`` form, and :class:`ChainEquation` is the
polynomial in the derivative-chain symbols ``D_k = (p_c d/dp)**k p``.
"""
from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from .errors import DomainError, NonIntegerExponent, NotReducibleToQ, PedalError

DROP_RTOL = 1e-12


def coerce(value):
    """Return an exact Fraction for ints/Fractions, a float otherwise."""
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Real):
        return float(value)
    raise TypeError(f"unsupported coefficient {value!r}")


def as_exponent(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, float) and value.is_integer():
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    raise NonIntegerExponent(f"exponent {value!r} is not an exact rational")


def is_exact(value) -> bool:
    return isinstance(value, Fraction)


def cpow(base, exponent: Fraction):
    """``base**exponent`` kept exact when possible."""
    exponent = as_exponent(exponent)
    if exponent.denominator == 1:
        n = exponent.numerator
        if is_exact(base):
            if base == 0 and n < 0:
                raise ZeroDivisionError("0 to a negative power")
            return base ** n
        return float(base) ** n
    if is_exact(base) and base > 0:
        num = _exact_root(base.numerator, exponent.denominator)
        den = _exact_root(base.denominator, exponent.denominator)
        if num is not None and den is not None:
            return Fraction(num, den) ** exponent.numerator
    if base < 0:
        raise DomainError(f"negative base {base} to rational power {exponent}")
    return float(base) ** float(exponent)


def _exact_root(n: int, k: int):
    root = round(n ** (1.0 / k))
    for cand in (root - 1, root, root + 1):
        if cand >= 0 and cand ** k == n:
            return cand
    return None


def _normalize(terms: Mapping) -> Dict:
    # merge-free input assumed; drop zeros and float dust
    if not terms:
        return {}
    mags = [abs(v) for v in terms.values()]
    top = max(mags)
    out = {}
    for key, val in terms.items():
        if is_exact(val):
            if val != 0:
                out[key] = val
        elif val != 0 and abs(val) > DROP_RTOL * top:
            out[key] = val
    return out


def format_number(value) -> str:
    if is_exact(value):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    value = float(value)
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def format_exponent(e: Fraction) -> str:
    if e.denominator == 1:
        return str(e.numerator)
    return f"({e.numerator}/{e.denominator})"


class PowerSum:
    """Finite sum of real powers of one variable with exact exponents.

    >>> PowerSum({-1: 2, 0: -1})(2.0)
    0.0
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | None = None):
        merged: Dict[Fraction, object] = {}
        for e, k in (terms or {}).items():
            e = as_exponent(e)
            k = coerce(k)
            merged[e] = merged[e] + k if e in merged else k
        self._terms = _normalize(merged)

    # construction helpers
    @classmethod
    def const(cls, value) -> "PowerSum":
        return cls({0: value})

    @classmethod
    def monomial(cls, coeff, exponent) -> "PowerSum":
        return cls({exponent: coeff})

    @classmethod
    def var(cls) -> "PowerSum":
        return cls({1: 1})

    @classmethod
    def from_poly(cls, coeffs: Sequence) -> "PowerSum":
        """Build from ascending polynomial coefficients."""
        return cls({i: c for i, c in enumerate(coeffs)})

    # inspection
    @property
    def terms(self) -> Dict[Fraction, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def exponents(self):
        return list(self._terms)

    def coeff(self, exponent) -> object:
        return self._terms.get(as_exponent(exponent), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_exact(self) -> bool:
        return all(is_exact(v) for v in self._terms.values())

    def has_integer_exponents(self) -> bool:
        return all(e.denominator == 1 for e in self._terms)

    def min_exponent(self) -> Fraction:
        return min(self._terms)

    def max_exponent(self) -> Fraction:
        return max(self._terms)

    def max_abs_coeff(self) -> float:
        return max((abs(float(v)) for v in self._terms.values()), default=0.0)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    # arithmetic
    def _combine(self, other, sign):
        other = _as_ps(other)
        out = dict(self._terms)
        for e, k in other._terms.items():
            out[e] = out[e] + sign * k if e in out else sign * k
        return _raw(out)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return _as_ps(other) - self

    def __neg__(self):
        return _raw({e: -k for e, k in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PowerSum):
            k = coerce(other)
            return _raw({e: v * k for e, v in self._terms.items()})
        out: Dict[Fraction, object] = {}
        for e1, k1 in self._terms.items():
            for e2, k2 in other._terms.items():
                e = e1 + e2
                out[e] = out[e] + k1 * k2 if e in out else k1 * k2
        return _raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerSum):
            if not other.is_monomial():
                raise PedalError("division by a non-monomial PowerSum")
            (e, k), = other._terms.items()
            return self.shift(-e) * (1 / k if not is_exact(k) else Fraction(1) / k)
        k = coerce(other)
        inv = Fraction(1) / k if is_exact(k) else 1.0 / k
        return self * inv

    def __pow__(self, n):
        if isinstance(n, numbers.Integral) and n >= 0:
            result = PowerSum.const(1)
            base = self
            n = int(n)
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        n = as_exponent(n)
        if self.is_monomial():
            (e, k), = self._terms.items()
            return _raw({e * n: cpow(k, n)})
        raise NonIntegerExponent(f"power {n} of a non-monomial PowerSum")

    def shift(self, exponent) -> "PowerSum":
        """Multiply by ``r**exponent``."""
        d = as_exponent(exponent)
        return _raw({e + d: k for e, k in self._terms.items()})

    def derivative(self) -> "PowerSum":
        return _raw({e - 1: k * e if is_exact(k) else k * float(e)
                     for e, k in self._terms.items() if e != 0})

    def scale_exponents(self, factor) -> "PowerSum":
        """Replace ``r`` by ``r**factor`` (exponents multiply)."""
        f = as_exponent(factor)
        return _raw({e * f: k for e, k in self._terms.items()})

    def to_float(self) -> "PowerSum":
        return _raw({e: float(k) for e, k in self._terms.items()})

    # evaluation
    def __call__(self, r):
        return ps_eval(self, r)

    def eval_unchecked(self, x):
        """Evaluate without the r > 0 guard; exponents must be integers when x <= 0."""
        return sum(float(k) * x ** float(e) for e, k in self._terms.items())

    # comparison
    def __eq__(self, other):
        if isinstance(other, numbers.Number):
            other = PowerSum.const(other)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def approx_equal(self, other, rtol=1e-12) -> bool:
        other = _as_ps(other)
        scale = max(self.max_abs_coeff(), other.max_abs_coeff(), 1e-300)
        diff = self - other
        return all(abs(float(k)) <= rtol * scale for _, k in diff.items())

    def render(self, var: str = "r") -> str:
        return render_power_sum(self, var)

    def __repr__(self):
        return f"PowerSum({self.render()!r})"

    def __str__(self):
        return self.render()

    # polynomial view
    def poly_coeffs(self) -> list:
        """Ascending coefficients; requires nonnegative integer exponents."""
        if self.is_zero():
            return [Fraction(0)]
        if not self.has_integer_exponents() or self.min_exponent() < 0:
            raise NonIntegerExponent("not a polynomial")
        deg = int(self.max_exponent())
        return [self._terms.get(Fraction(i), Fraction(0)) for i in range(deg + 1)]

    def substitute_power(self, c, gamma) -> "PowerSum":
        return ps_substitute_power(self, c, gamma)

    def substitute_moebius(self, alpha, beta):
        return ps_substitute_moebius(self, alpha, beta)


def _raw(terms) -> PowerSum:
    ps = PowerSum.__new__(PowerSum)
    ps._terms = _normalize(terms)
    return ps


def _as_ps(x) -> PowerSum:
    if isinstance(x, PowerSum):
        return x
    return PowerSum.const(x)


def ps_arith(kind: str, a: PowerSum, b) -> PowerSum:
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "pow_int":
        if not isinstance(b, numbers.Integral) or b < 0:
            raise ValueError("pow_int needs a nonnegative integer")
        return a ** int(b)
    if kind == "scale":
        return a * b
    raise ValueError(f"unknown arithmetic kind {kind!r}")


def ps_eval(a: PowerSum, r) -> float:
    r = float(r)
    if not r > 0:
        raise DomainError(f"PowerSum evaluated at r={r} <= 0")
    total = 0.0
    for e, k in a.items():
        total += float(k) * (r ** int(e) if e.denominator == 1 else r ** float(e))
    return total


def ps_substitute_power(a: PowerSum, c, gamma) -> PowerSum:
    """r -> c*r**gamma: term (e, k) becomes (gamma*e, k*c**e)."""
    gamma = as_exponent(gamma)
    c = coerce(c)
    if gamma == 0 or c == 0:
        raise ValueError("power substitution needs c != 0 and gamma != 0")
    return _raw({e * gamma: k * cpow(c, e) for e, k in a.items()})


def binomial_power(linear: PowerSum, n: int) -> PowerSum:
    return linear ** n


def ps_substitute_moebius(a: PowerSum, alpha, beta) -> Tuple[PowerSum, PowerSum]:
    """r -> alpha*r/(1 - beta*r), returned as (numerator, denominator).

    The denominator is ``(1 - beta*r)**m`` with m the largest positive exponent
    (zero when there is none), expanded.
    """
    if not a.has_integer_exponents():
        raise NonIntegerExponent("Moebius substitution needs integer exponents")
    alpha, beta = coerce(alpha), coerce(beta)
    one_minus = PowerSum({0: 1, 1: -beta})
    m = max([int(e) for e in a.exponents() if e > 0], default=0)
    num = PowerSum()
    for e, k in a.items():
        e = int(e)
        num = num + PowerSum.monomial(k * cpow(alpha, Fraction(e)), e) * one_minus ** (m - e)
    return num, one_minus ** m


def poly_gcd(a: list, b: list) -> list:
    """Monic gcd of two exact ascending coefficient lists."""
    def strip(p):
        p = list(p)
        while p and p[-1] == 0:
            p.pop()
        return p

    a, b = strip(a), strip(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if not a:
        return [Fraction(1)]
    lead = a[-1]
    return [c / lead for c in a]


def poly_divmod(num: list, den: list):
    num = list(num)
    while num and num[-1] == 0:
        num.pop()
    dd = len(den) - 1
    if len(num) - 1 < dd:
        return [Fraction(0)], num
    quot = [Fraction(0)] * (len(num) - dd)
    for i in range(len(num) - 1 - dd, -1, -1):
        coef = num[i + dd] / den[-1]
        quot[i] = coef
        for j, d in enumerate(den):
            num[i + j] -= coef * d
    rem = num[:dd]
    while rem and rem[-1] == 0:
        rem.pop()
    return quot, rem


# --------------------------------------------------------------------- render

def render_term(k, e: Fraction, var: str, first: bool) -> str:
    neg = k < 0
    mag = -k if neg else k
    mag_s = format_number(mag)
    needs_paren = "/" in mag_s and not is_exact(mag) is False and e != 0
    if is_exact(mag) and mag.denominator != 1 and e != 0:
        mag_s = f"({mag_s})"
    del needs_paren
    if e == 0:
        body = mag_s
    elif e > 0:
        pw = var if e == 1 else f"{var}^{format_exponent(e)}"
        body = pw if mag == 1 else f"{mag_s}*{pw}"
    else:
        pw = var if e == -1 else f"{var}^{format_exponent(-e)}"
        body = f"{mag_s}/{pw}"
    if first:
        return f"-{body}" if neg else body
    return f" - {body}" if neg else f" + {body}"


def render_power_sum(a: PowerSum, var: str = "r") -> str:
    if a.is_zero():
        return "0"
    return "".join(render_term(k, e, var, i == 0) for i, (e, k) in enumerate(a.items()))


# --------------------------------------------------------------------- PRSum

class PRSum:
    """Bivariate sum over ``p`` and ``r``: keys are (p-exponent, r-exponent)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | None = None):
        merged = {}
        for (i, e), k in (terms or {}).items():
            key = (as_exponent(i), as_exponent(e))
            k = coerce(k)
            merged[key] = merged[key] + k if key in merged else k
        self._terms = _normalize(merged)

    @classmethod
    def _make(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = _normalize(terms)
        return obj

    @classmethod
    def const(cls, k):
        return cls({(0, 0): k})

    @classmethod
    def from_power_sum(cls, ps: PowerSum, p_exponent=0):
        return cls({(p_exponent, e): k for e, k in ps.items()})

    def items(self):
        return self._terms.items()

    def is_zero(self):
        return not self._terms

    def is_monomial(self):
        return len(self._terms) == 1

    def __add__(self, other):
        other = other if isinstance(other, PRSum) else PRSum.const(other)
        out = dict(self._terms)
        for key, k in other._terms.items():
            out[key] = out[key] + k if key in out else k
        return PRSum._make(out)

    __radd__ = __add__

    def __neg__(self):
        return PRSum._make({key: -k for key, k in self._terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, PRSum) else PRSum.const(-coerce(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PRSum):
            k = coerce(other)
            return PRSum._make({key: v * k for key, v in self._terms.items()})
        out = {}
        for (i1, e1), k1 in self._terms.items():
            for (i2, e2), k2 in other._terms.items():
                key = (i1 + i2, e1 + e2)
                out[key] = out[key] + k1 * k2 if key in out else k1 * k2
        return PRSum._make(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if isinstance(n, numbers.Integral) and n >= 0:
            out = PRSum.const(1)
            for _ in range(int(n)):
                out = out * self
            return out
        n = as_exponent(n)
        if self.is_monomial():
            ((i, e), k), = self._terms.items()
            return PRSum._make({(i * n, e * n): cpow(k, n)})
        raise NonIntegerExponent(f"power {n} of a non-monomial expression")

    def __eq__(self, other):
        return isinstance(other, PRSum) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def evaluate(self, r, p) -> float:
        return sum(float(k) * float(p) ** float(i) * float(r) ** float(e)
                   for (i, e), k in self._terms.items())

    def substitute(self, p_map: Tuple, r_map: Tuple) -> "PRSum":
        """Monomial substitution.

        ``p_map = (coeff, a, b)`` replaces ``p`` by ``coeff * p**a * r**b``;
        ``r_map`` likewise for ``r``.
        """
        cp, ap, bp = coerce(p_map[0]), as_exponent(p_map[1]), as_exponent(p_map[2])
        cr, ar, br = coerce(r_map[0]), as_exponent(r_map[1]), as_exponent(r_map[2])
        out = {}
        for (i, e), k in self._terms.items():
            key = (ap * i + ar * e, bp * i + br * e)
            val = k * cpow(cp, i) * cpow(cr, e)
            out[key] = out[key] + val if key in out else val
        return PRSum._make(out)

    def to_pedal(self) -> "PedalEquation":
        """Square away odd powers of p and rewrite in q = 1/p**2."""
        even, odd = {}, {}
        for (i, e), k in self._terms.items():
            if i.denominator != 1:
                raise NotReducibleToQ(f"p raised to non-integer power {i}")
            (even if i.numerator % 2 == 0 else odd)[(i, e)] = k
        if odd:
            ev, od = PRSum._make(even), PRSum._make(odd)
            combined = ev * ev - od * od
        else:
            combined = self
        return PedalEquation.from_pr(combined)

    def render(self) -> str:
        parts = []
        for idx, ((i, e), k) in enumerate(self._terms.items()):
            factors = []
            if i != 0:
                factors.append("p" if i == 1 else f"p^{format_exponent(i)}" if i > 0 else None)
            body_num, body_den = [], []
            for name, ex in (("p", i), ("r", e)):
                if ex > 0:
                    body_num.append(name if ex == 1 else f"{name}^{format_exponent(ex)}")
                elif ex < 0:
                    body_den.append(name if ex == -1 else f"{name}^{format_exponent(-ex)}")
            mag = -k if k < 0 else k
            mag_s = format_number(mag)
            if is_exact(mag) and mag.denominator != 1:
                mag_s = f"({mag_s})"
            num = "*".join(([mag_s] if mag != 1 or not body_num else []) + body_num)
            term = num + "".join(f"/{d}" for d in body_den)
            sign = ("-" if k < 0 else "") if idx == 0 else (" - " if k < 0 else " + ")
            parts.append(sign + term)
        return "".join(parts) if parts else "0"

    def __repr__(self):
        return f"PRSum({self.render()!r})"


# -------------------------------------------------------------- PedalEquation

class PedalEquation:
    """``sum_j coeffs[j](r) * q**j = 0`` with ``q = 1/p**2``, canonical form."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [c if isinstance(c, PowerSum) else PowerSum.const(c) for c in coeffs]
        self._coeffs = tuple(_canonical(cs))

    @classmethod
    def from_pr(cls, expr: PRSum) -> "PedalEquation":
        """Read an expression with only even powers of p as a q-polynomial."""
        buckets: Dict[int, Dict] = {}
        for (i, e), k in expr.items():
            if i.denominator != 1 or i.numerator % 2:
                raise NotReducibleToQ(f"odd power p^{i} remains")
            j = -i.numerator // 2
            buckets.setdefault(j, {})[e] = k
        if not buckets:
            raise PedalError("the zero expression is not an equation")
        lo = min(buckets)
        hi = max(buckets)
        return cls([PowerSum(buckets.get(j, {})) for j in range(lo, hi + 1)])

    @property
    def coeffs(self) -> Tuple[PowerSum, ...]:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    def __getitem__(self, j) -> PowerSum:
        return self._coeffs[j] if 0 <= j < len(self._coeffs) else PowerSum()

    def canonicalize(self) -> "PedalEquation":
        return PedalEquation(self._coeffs)

    def is_exact(self) -> bool:
        return all(c.is_exact() for c in self._coeffs)

    def has_integer_exponents(self) -> bool:
        return all(c.has_integer_exponents() for c in self._coeffs)

    def to_pr(self) -> PRSum:
        terms = {}
        for j, c in enumerate(self._coeffs):
            for e, k in c.items():
                terms[(Fraction(-2 * j), e)] = k
        return PRSum._make(terms)

    def scale(self, k) -> "PedalEquation":
        return PedalEquation([c * k for c in self._coeffs])

    def monic(self) -> "PedalEquation":
        """Scale so the top-exponent coefficient of the top q-power is 1."""
        top = self._coeffs[-1]
        lead = top.coeff(top.max_exponent())
        inv = Fraction(1) / lead if is_exact(lead) else 1.0 / float(lead)
        return self.scale(inv)

    def primitive(self) -> "PedalEquation":
        """Divide out the common polynomial factor of all coefficients (exact input)."""
        eq = self
        if eq.is_exact() and eq.has_integer_exponents():
            polys = [c.poly_coeffs() for c in eq._coeffs]
            g = polys[0]
            for p in polys[1:]:
                g = poly_gcd(g, p)
            g = poly_gcd(g, g)
            if len(g) > 1:
                eq = PedalEquation([PowerSum.from_poly(poly_divmod(p, g)[0]) if any(p) else PowerSum()
                                    for p in polys])
        return eq.monic()

    # numerics
    def evaluate(self, r, q) -> float:
        return sum(ps_eval(c, r) * q ** j for j, c in enumerate(self._coeffs))

    def terms_at(self, r, q):
        return [ps_eval(c, r) * q ** j for j, c in enumerate(self._coeffs)]

    def relative_residual(self, r, q) -> float:
        parts = self.terms_at(r, q)
        scale = max(abs(t) for t in parts)
        if scale == 0:
            return 0.0
        return abs(sum(parts)) / scale

    def q_roots(self, r) -> list:
        """Real nonnegative q solving the equation at r (ascending)."""
        vals = [ps_eval(c, r) for c in self._coeffs]
        if self.degree == 0:
            return []
        if self.degree == 1:
            if vals[1] == 0:
                return []
            q = -vals[0] / vals[1]
            return [q] if q >= 0 else []
        roots = np.roots(vals[::-1])
        real = sorted(float(z.real) for z in roots if abs(z.imag) <= 1e-10 * max(1.0, abs(z)))
        return [q for q in real if q >= 0]

    def solve_q(self, r, root_index=None) -> float:
        from .errors import MultiBranchAmbiguity
        if self.degree > 1 and root_index is None:
            raise MultiBranchAmbiguity("equation has degree > 1 in q; pass a root index")
        roots = self.q_roots(r)
        idx = 0 if root_index is None else root_index
        if not roots or idx >= len(roots):
            return math.nan
        return roots[idx]

    # comparison
    def __eq__(self, other):
        return isinstance(other, PedalEquation) and self._coeffs == other._coeffs

    def __hash__(self):
        return hash(self._coeffs)

    def same_curve(self, other: "PedalEquation", rtol: float = 0.0) -> bool:
        """True if the coefficient vectors are proportional over the PowerSums.

        Checks ``N_i * M_j == N_j * M_i`` for all pairs, which ignores overall
        scalar and common power-sum factors left over from clearing denominators.
        """
        if self.degree != other.degree:
            return False
        for i in range(self.degree + 1):
            for j in range(i + 1, self.degree + 1):
                lhs = self[i] * other[j]
                rhs = self[j] * other[i]
                if rtol == 0.0:
                    if lhs != rhs:
                        return False
                elif not lhs.approx_equal(rhs, rtol):
                    return False
        # proportional zero patterns
        return all(self[i].is_zero() == other[i].is_zero() for i in range(self.degree + 1))

    def render(self) -> str:
        return render_pedal_equation(self)

    def __repr__(self):
        return f"PedalEquation({self.render()!r})"

    def __str__(self):
        return self.render()


def _canonical(cs):
    while cs and cs[-1].is_zero():
        cs.pop()
    while cs and cs[0].is_zero():
        cs.pop(0)
    if not cs:
        raise PedalError("the zero PedalEquation is not allowed")
    lo = min(c.min_exponent() for c in cs if not c.is_zero())
    if lo != 0:
        cs = [c.shift(-lo) for c in cs]
    return cs


def canonicalize(e: PedalEquation) -> PedalEquation:
    return e.canonicalize()


def render_pedal_equation(e: PedalEquation) -> str:
    if e.degree == 1 and e[1].is_monomial():
        (ex, k), = e[1].items()
        lhs_k = k
        rhs = -(e[0].shift(-ex))
        if lhs_k < 0:
            lhs_k, rhs = -lhs_k, -rhs
        lhs = "1/p^2" if lhs_k == 1 else f"{_paren_num(lhs_k)}/p^2"
        return f"{lhs} = {render_power_sum(rhs)}"
    if e.degree == 1:
        rhs = -e[0]
        return f"({render_power_sum(e[1])})/p^2 = {render_power_sum(rhs)}"
    parts = []
    for j in range(e.degree, -1, -1):
        c = e[j]
        if c.is_zero():
            continue
        body = render_power_sum(c)
        if j == 0:
            parts.append(f"({body})" if e.degree else body)
        else:
            parts.append(f"({body})/p^{2 * j}")
    return " + ".join(parts) + " = 0"


def _paren_num(k):
    s = format_number(k)
    return f"({s})" if "/" in s else s


# -------------------------------------------------------------- ChainEquation

class ChainEquation:
    """Polynomial in the chain symbols ``D_0 .. D_n``.

    ``D_0 = p``, ``D_1 = p_c`` and ``D_{k+1} = p_c * d(D_k)/dp``. Keys are
    exponent tuples of length ``n + 1``; trailing unused symbols are trimmed so
    ``order`` is always the largest index actually present.
    """

    __slots__ = ("_terms", "order")

    def __init__(self, terms: Mapping[Tuple, object]):
        merged = {}
        for key, k in terms.items():
            key = tuple(int(x) for x in key)
            if any(x < 0 for x in key):
                raise ValueError("chain exponents must be nonnegative integers")
            k = coerce(k)
            merged[key] = merged[key] + k if key in merged else k
        merged = _normalize(merged)
        width = max((max((i for i, x in enumerate(key) if x), default=-1) for key in merged), default=-1) + 1
        self._terms = {tuple(list(key[:width]) + [0] * (width - len(key))): k for key, k in merged.items()}
        self.order = max(width - 1, 0)

    @classmethod
    def symbol(cls, k: int, coeff=1):
        key = [0] * (k + 1)
        key[k] = 1
        return cls({tuple(key): coeff})

    @classmethod
    def const(cls, c):
        return cls({(): c})

    def items(self):
        return self._terms.items()

    def uses(self, index: int) -> bool:
        return any(len(key) > index and key[index] for key in self._terms)

    def _pad(self, key, n):
        return tuple(list(key) + [0] * (n - len(key)))

    def __add__(self, other):
        other = other if isinstance(other, ChainEquation) else ChainEquation.const(other)
        n = max(self.order, other.order) + 1
        out = {}
        for src in (self, other):
            for key, k in src._terms.items():
                key = self._pad(key, n)
                out[key] = out[key] + k if key in out else k
        return ChainEquation(out)

    def __neg__(self):
        return ChainEquation({key: -k for key, k in self._terms.items()})

    def __sub__(self, other):
        return self + (-(other if isinstance(other, ChainEquation) else ChainEquation.const(other)))

    def __mul__(self, other):
        if not isinstance(other, ChainEquation):
            k = coerce(other)
            return ChainEquation({key: v * k for key, v in self._terms.items()})
        n = max(self.order, other.order) + 1
        out = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                key = tuple(a + b for a, b in zip(self._pad(k1, n), self._pad(k2, n)))
                out[key] = out[key] + v1 * v2 if key in out else v1 * v2
        return ChainEquation(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = ChainEquation.const(1)
        for _ in range(int(n)):
            out = out * self
        return out

    def shift_down(self) -> "ChainEquation":
        """D_k -> D_{k-1}; caller guarantees D_0 is absent."""
        return ChainEquation({key[1:]: k for key, k in self._terms.items()})

    def shift_up(self) -> "ChainEquation":
        return ChainEquation({(0,) + tuple(key): k for key, k in self._terms.items()})

    def evaluate(self, values: Sequence[float]) -> float:
        total = 0.0
        for key, k in self._terms.items():
            term = float(k)
            for i, x in enumerate(key):
                if x:
                    term *= values[i] ** x
            total += term
        return total

    def __eq__(self, other):
        return isinstance(other, ChainEquation) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def render(self) -> str:
        if not self._terms:
            return "0 = 0"
        parts = []
        for idx, (key, k) in enumerate(self._terms.items()):
            syms = [f"D{i}" if x == 1 else f"D{i}^{x}" for i, x in enumerate(key) if x]
            mag = -k if k < 0 else k
            mag_s = format_number(mag)
            if is_exact(mag) and mag.denominator != 1:
                mag_s = f"({mag_s})"
            body = "*".join(([mag_s] if mag != 1 or not syms else []) + syms)
            sign = ("-" if k < 0 else "") if idx == 0 else (" - " if k < 0 else " + ")
            parts.append(sign + body)
        return "".join(parts) + " = 0"

    def __repr__(self):
        return f"ChainEquation({self.render()!r})"
