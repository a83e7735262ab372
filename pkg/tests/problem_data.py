"""Parameter sets shared by the problem tests and the acceptance suite."""
import math
from fractions import Fraction

import numpy as np

from pedalcurve.problems import DarkParams, SchwarzschildParams, h_polynomial

F = Fraction


def random_dark_sets(seed: int = 1, n: int = 100):
    rng = np.random.default_rng(seed)

    def draw(lo, hi):
        return F(float(rng.uniform(lo, hi))).limit_denominator(64)

    return [DarkParams.from_omega(draw(0.1, 3), draw(0.1, 3), draw(-2, 2), draw(0.2, 2), draw(-5, 1))
            for _ in range(n)]


# c = -(2 F L^4 + M^3)/(M L^2): the alpha^3 coefficient of the reduction cubic
# vanishes and the reduction lands on M~ = F~ = 0 with c~ = 1/4 > 0
FACTORED = DarkParams.from_omega(1, F(1, 8), F(-1, 2), 1, F(-5, 4))

# (L, omega, M, F, c) = (1, -1/2, 2, 1, -5) matches the oval (alpha^2, C, b^2, mu) = (1/2, 1, 1, 2)
DATASET = DarkParams.from_omega(2, 1, F(-1, 2), 1, -5)


def dark_from_oval(alpha2, C, a2, mu):
    """Forward substitution: the dark parameters whose rotating-frame orbit is the given oval."""
    b2 = C * C - alpha2 * a2
    k = 1 - alpha2
    L, w = b2 * mu / 2, -k * mu / 2
    return DarkParams.from_omega(C * b2 * mu * mu / 2, k * C * mu * mu / 2, w, L,
                                 -(k * C * C + b2) * mu * mu - 2 * w * L)


def three_root_params(r1, r2, r3):
    """Rational (r_s, a, b) close to h = d (r - r1)(r - r2)(r - r3)."""
    d = -1 / (r1 * r2 + r1 * r3 + r2 * r3)
    rs = -d * r1 * r2 * r3
    a = math.sqrt(rs / (-d * (r1 + r2 + r3)))
    b = 1 / math.sqrt(d + 1 / a ** 2)
    return SchwarzschildParams(*(F(x).limit_denominator(100) for x in (rs, a, b)))


def sign_scan_count(sp, n=400_000):
    """Positive roots of h by counting sign changes on a fine log grid."""
    c = [float(x) for x in h_polynomial(sp)]
    r = np.geomspace(1e-4, 1e5, n)
    h = ((c[3] * r + c[2]) * r + c[1]) * r + c[0]
    s = np.sign(h)
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))


SCHWARZSCHILD_SETS = (
    [SchwarzschildParams(rs, a, b) for rs in (F(1, 10), F(1, 2), F(2))
     for a in (F(1, 2), F(2), F(20)) for b in (F(1, 2), F(3), F(30))]
    + [three_root_params(*rr) for rr in ((1, 10, 20), (2, 5, 40), (1, 3, 9), (3, 30, 100))]
)
