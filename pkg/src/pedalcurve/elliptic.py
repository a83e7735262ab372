"""Jacobi elliptic functions sn, cn, dn and the complete integral K.

Evaluation uses the descending Gauss (Landen) transformation, which also
works for the complex moduli that sn* needs.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ModulusOutOfRange

_SMALL = 1e-8


def agm(a, b, tol: float = 1e-16):
    a, b = complex(a), complex(b)
    for _ in range(64):
        if abs(a - b) <= tol * abs(a):
            break
        a, b = (a + b) / 2, np.sqrt(a * b)
    return (a + b) / 2


def elliptic_K(k: float) -> float:
    """Quarter period K(k) = pi / (2 AGM(1, k'))."""
    k = float(k)
    if not -1 < k < 1:
        raise ModulusOutOfRange(f"modulus must satisfy |k| < 1, got {k}")
    return math.pi / (2 * agm(1.0, math.sqrt(1 - k * k)).real)


def _descend(z, k, depth: int = 0):
    """(sn, cn, dn) at complex z, k via the Gauss transformation."""
    if abs(k) < _SMALL or depth > 40:
        s, c = np.sin(z), np.cos(z)
        k2 = k * k
        corr = (z - s * c) * k2 / 4
        return s - corr * c, c + corr * s, 1 - k2 * s * s / 2
    kp = np.sqrt(1 - k * k)
    k1 = (1 - kp) / (1 + kp)
    s, c, d = _descend(z / (1 + k1), k1, depth + 1)
    den = 1 + k1 * s * s
    sn = (1 + k1) * s / den
    cn = c * d / den
    dn = (1 - k1 * s * s) / den
    return sn, cn, dn


def jacobi(z, k: float):
    """Return (sn, cn, dn) for real z (scalar or array) and real |k| < 1."""
    k = float(k)
    if not -1 < k < 1:
        raise ModulusOutOfRange(f"modulus must satisfy |k| < 1, got {k}")
    z = np.asarray(z, dtype=float)
    sn, cn, dn = _descend(z.astype(complex), complex(abs(k)))
    return sn.real, cn.real, dn.real


def jacobi_complex(z, k):
    """(sn, cn, dn) for complex z and complex modulus k (principal branches)."""
    z = np.asarray(z, dtype=complex)
    k = complex(k)
    if k.imag == 0 and abs(k.real) >= 1:
        raise ModulusOutOfRange("real modulus must satisfy |k| < 1")
    return _descend(z, k)


def sn_star(z, lam: float):
    """sn*(z; lam) = e^{i lam/2} sn(e^{-i lam/2} z, e^{i lam}); real for real z."""
    z = np.asarray(z, dtype=float)
    rot = np.exp(0.5j * lam)
    s, c, d = jacobi_complex(z / rot, rot * rot)
    val = rot * s
    if np.any(np.abs(val.imag) > 1e-10 * np.maximum(1.0, np.abs(val.real))):
        raise ArithmeticError("sn* lost its real value")
    # derivative: d/dz sn* = cn * dn evaluated at the rotated argument
    der = c * d
    return val.real, der.real
