"""Exact real-root isolation for polynomials with rational coefficients.

Polynomials are ascending coefficient lists. Float inputs are converted to the
exact rationals they represent, so Sturm counts are exact.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence, Tuple

from .expr import poly_divmod, poly_gcd


def exact(coeffs: Sequence) -> List[Fraction]:
    return [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]


def strip(p: Sequence) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def sign_variation(coeffs: Sequence) -> int:
    """Number of sign changes in the coefficient list, zeros skipped."""
    signs = [1 if c > 0 else -1 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def peval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def pderiv(p: Sequence) -> list:
    return [c * i for i, c in enumerate(p)][1:]


def sturm_sequence(p: Sequence) -> List[list]:
    p = strip(exact(p))
    seq = [p, strip(pderiv(p))]
    while seq[-1] and len(seq[-1]) > 1:
        _, rem = poly_divmod(seq[-2], seq[-1])
        rem = strip(rem)
        if not rem:
            break
        seq.append([-c for c in rem])
    return [s for s in seq if s]


def _variations_at(seq, x) -> int:
    return sign_variation([peval(s, x) for s in seq])


def _variations_at_inf(seq) -> int:
    return sign_variation([s[-1] for s in seq])


def count_roots(seq, lo, hi) -> int:
    """Distinct real roots in (lo, hi]; hi may be None for +infinity."""
    v_hi = _variations_at_inf(seq) if hi is None else _variations_at(seq, hi)
    return _variations_at(seq, lo) - v_hi


def positive_root_bound(p: Sequence) -> Fraction:
    """Cauchy bound: every root has modulus below this."""
    p = strip(exact(p))
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def square_free_decomposition(p: Sequence):
    """Yun's algorithm: returns [(factor, multiplicity), ...] (factors monic)."""
    p = strip(exact(p))
    if len(p) <= 1:
        return []
    out = []
    dp = strip(pderiv(p))
    a = poly_gcd(p, dp)
    b = strip(poly_divmod(p, a)[0])
    c = strip(poly_divmod(dp, a)[0])
    d = strip([x - y for x, y in _zip_pad(c, pderiv(b))])
    i = 1
    while len(b) > 1:
        a = poly_gcd(b, d) if d else b
        if len(a) > 1:
            out.append((a, i))
        b = strip(poly_divmod(b, a)[0])
        c = strip(poly_divmod(d, a)[0]) if d else []
        d = strip([x - y for x, y in _zip_pad(c, pderiv(b))])
        i += 1
    return out


def _zip_pad(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return zip(a, b)


def isolate_positive_roots(coeffs: Sequence, tol: float = 1e-14) -> List[Tuple[float, Tuple[Fraction, Fraction], int]]:
    """Positive real roots as (value, (lo, hi), multiplicity), ascending.

    Each root is isolated by Sturm bisection, then refined by exact bisection
    until the bracket is narrower than ``tol`` relative.
    """
    p = strip(exact(coeffs))
    if len(p) <= 1:
        return []
    # drop roots at zero
    while p[0] == 0:
        p = p[1:]
    roots = []
    for factor, mult in square_free_decomposition(p) or [(p, 1)]:
        seq = sturm_sequence(factor)
        bound = positive_root_bound(factor)
        stack = [(Fraction(0), bound)]
        while stack:
            lo, hi = stack.pop()
            n = count_roots(seq, lo, hi)
            if n == 0:
                continue
            if n == 1:
                roots.append((_refine(factor, lo, hi, tol), mult))
                continue
            mid = (lo + hi) / 2
            stack.append((mid, hi))
            stack.append((lo, mid))
    roots.sort(key=lambda t: t[0][0])
    return [(float((lo + hi) / 2), (lo, hi), m) for (lo, hi), m in roots]


def _refine(p, lo, hi, tol):
    flo = peval(p, lo)
    fhi = peval(p, hi)
    if fhi == 0:
        return hi, hi
    # root is in (lo, hi]; shrink while keeping a sign change (or exact hit)
    while hi - lo > tol * max(abs(hi), Fraction(1, 10 ** 12)):
        mid = (lo + hi) / 2
        # keep the fractions short
        mid = mid.limit_denominator(2 ** 80) if mid.denominator > 2 ** 120 else mid
        if not lo < mid < hi:
            mid = (lo + hi) / 2
        fm = peval(p, mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return lo, hi


def brute_force_positive_roots(coeffs: Sequence, r_max: float, n: int = 10 ** 6):
    """Sign-change scan on a uniform grid; independent oracle for tests."""
    import numpy as np

    xs = np.linspace(r_max / n, r_max, n)
    vals = np.polynomial.polynomial.polyval(xs, [float(c) for c in coeffs])
    s = np.sign(vals)
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))
