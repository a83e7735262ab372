import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ellipj, ellipk

from pedalcurve.elliptic import agm, elliptic_K, jacobi, jacobi_complex, sn_star
from pedalcurve.errors import ModulusOutOfRange

Z = np.linspace(-7, 7, 301)


@pytest.mark.parametrize("k", [0.0, 0.1, 0.5, 0.9, 0.99, -0.7])
def test_pythagorean_identities(k):
    sn, cn, dn = jacobi(Z, k)
    assert np.max(np.abs(sn ** 2 + cn ** 2 - 1)) < 1e-12
    assert np.max(np.abs(dn ** 2 + k * k * sn ** 2 - 1)) < 1e-12


@pytest.mark.parametrize("k", [0.0, 0.3, 0.8, 0.999])
def test_agrees_with_scipy(k):
    sn, cn, dn = jacobi(Z, k)
    ref = ellipj(Z, k * k)
    assert np.max(np.abs(sn - ref[0])) < 5e-14
    assert np.max(np.abs(cn - ref[1])) < 5e-14
    assert np.max(np.abs(dn - ref[2])) < 5e-14


def test_zero_modulus_is_circular():
    sn, cn, dn = jacobi(Z, 0.0)
    assert np.allclose(sn, np.sin(Z), atol=1e-15)
    assert np.allclose(cn, np.cos(Z), atol=1e-15)
    assert np.allclose(dn, 1.0)


@pytest.mark.parametrize("k", [0.2, 0.6, 0.95])
def test_quarter_period(k):
    K = elliptic_K(k)
    assert K == pytest.approx(ellipk(k * k), rel=1e-14)
    sn, cn, dn = jacobi(np.array([K]), k)
    assert sn[0] == pytest.approx(1, abs=1e-14)
    assert abs(cn[0]) < 1e-7  # cn ~ sqrt(1 - sn) amplifies rounding near K
    assert dn[0] == pytest.approx(math.sqrt(1 - k * k), rel=1e-13)


def test_K_at_zero():
    assert elliptic_K(0) == pytest.approx(math.pi / 2, rel=1e-15)


def test_agm_value():
    # AGM(1, sqrt(2)) is Gauss's constant inverse
    assert agm(1, math.sqrt(2)).real == pytest.approx(1.19814023473559220744, rel=1e-15)


def test_modulus_out_of_range():
    with pytest.raises(ModulusOutOfRange):
        jacobi(0.5, 1.0)
    with pytest.raises(ModulusOutOfRange):
        elliptic_K(-1.2)


@settings(max_examples=60)
@given(st.floats(-0.95, 0.95), st.floats(-5, 5))
def test_derivative_of_sn(k, z):
    h = 1e-5
    sp = jacobi(np.array([z + h]), k)[0][0]
    sm = jacobi(np.array([z - h]), k)[0][0]
    _, cn, dn = jacobi(np.array([z]), k)
    assert (sp - sm) / (2 * h) == pytest.approx(cn[0] * dn[0], abs=1e-8)


def test_complex_argument_matches_imaginary_transformation():
    # Jacobi's imaginary transformation: sn(iu, k) = i sc(u, k')
    k, u = 0.6, 0.7
    kp = math.sqrt(1 - k * k)
    s, _, _ = jacobi_complex(1j * u, k)
    sn, cn, _ = jacobi(np.array([u]), kp)
    assert s == pytest.approx(1j * sn[0] / cn[0], rel=1e-13)


@pytest.mark.parametrize("lam", [0.4, 1.0, 2.0, 2.8])
def test_sn_star_is_real_and_solves_its_ode(lam):
    z = np.linspace(0.0, 0.8, 50)
    y, dy = sn_star(z, lam)
    # (y')^2 = 1 - 2 cos(lam) y^2 + y^4
    assert np.max(np.abs(dy ** 2 - (1 - 2 * math.cos(lam) * y ** 2 + y ** 4))) < 1e-12
    h = 1e-6
    fd = (sn_star(z + h, lam)[0] - sn_star(z - h, lam)[0]) / (2 * h)
    assert np.max(np.abs(fd - dy)) < 1e-8
