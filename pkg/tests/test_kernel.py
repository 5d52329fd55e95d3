import cmath
import math
from fractions import Fraction as F

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from mordell.errors import DomainError
from mordell.forms import AlphaShift, QuadraticForm
from mordell.kernel import (REMOVABLE_EPS, cot_split_check, diagonalised, h_alpha_kernel, kernel_F,
                            kernel_F_prime, kernel_F_second, kernel_G, kernel_g, kernel_g_complex)


def test_F_G_values():
    assert kernel_F(0.25, 0.0) == 0.0
    assert kernel_G(0.25, 0.0) == pytest.approx(1.0)
    assert kernel_F(0.5, 0.3) == pytest.approx(math.tanh(0.3 * math.pi))
    assert kernel_G(0.5, 0.3) == pytest.approx(0.0, abs=1e-15)
    assert kernel_F(0, 0.4) == pytest.approx(1 / math.tanh(0.4 * math.pi))
    assert kernel_F(0.3, 30.0) == 1.0 and kernel_F(0.3, -30.0) == -1.0
    with pytest.raises(DomainError):
        kernel_F(1, 0.0)


@pytest.mark.parametrize("a,x", [(0.1, 0.3), (0.37, -0.8), (0.5, 1.2), (0.9, 0.05)])
def test_F_G_are_cot_parts(a, x):
    z = math.pi * a + 1j * math.pi * x
    cot = cmath.cos(z) / cmath.sin(z)
    assert kernel_G(a, x) == pytest.approx(cot.real, abs=1e-13)
    assert kernel_F(a, x) == pytest.approx(-cot.imag, abs=1e-13)
    re, im = cot_split_check(z.real, z.imag)
    assert (re, im) == (pytest.approx(cot.real, abs=1e-13), pytest.approx(cot.imag, abs=1e-13))


def test_F_G_symmetries():
    x = np.linspace(-2, 2, 9)
    for a in (0.2, 0.45):
        assert np.allclose(kernel_F(a, -x), -kernel_F(a, x))
        assert np.allclose(kernel_G(a, -x), kernel_G(a, x))
        assert np.allclose(kernel_F(a + 1, x), kernel_F(a, x))
        assert np.allclose(kernel_F(-a, x), kernel_F(a, x))


def test_F_derivatives():
    a, h = 0.3, 1e-5
    for x in (-0.7, 0.0, 0.4, 1.5):
        fd = (kernel_F(a, x + h) - kernel_F(a, x - h)) / (2 * h)
        assert kernel_F_prime(a, x) == pytest.approx(fd, rel=1e-7, abs=1e-8)
        fd2 = (kernel_F_prime(a, x + h) - kernel_F_prime(a, x - h)) / (2 * h)
        assert kernel_F_second(a, x) == pytest.approx(fd2, rel=1e-6, abs=1e-6)


def test_cot_pole():
    with pytest.raises(DomainError):
        cot_split_check(0.0, 0.0)


def test_generic_kernel_value():
    Q = QuadraticForm(1, 1, 1)
    al = AlphaShift(F(1, 4), F(1, 4))
    assert kernel_g(Q, al, 0.0, 0.0) == pytest.approx(2.0)
    assert kernel_g_complex(Q, al, 0.0, 0.0) == pytest.approx(2.0)


@pytest.mark.parametrize("alpha", [(F(1, 3), F(1, 5)), (F(0), F(1, 3)), (F(2, 5), F(1))])
def test_kernel_parity(alpha):
    Q, al = QuadraticForm(2, 1, 3), AlphaShift(*alpha)
    rng = np.random.default_rng(5)
    for w1, w2 in rng.uniform(-2, 2, (10, 2)):
        g = kernel_g_complex(Q, al, w1, w2)
        gm = kernel_g_complex(Q, al, -w1, -w2)
        assert gm.real == pytest.approx(g.real, rel=1e-10, abs=1e-12)
        assert gm.imag == pytest.approx(-g.imag, rel=1e-10, abs=1e-12)
        assert kernel_g(Q, al, w1, w2) == pytest.approx(g.real, rel=1e-12, abs=1e-12)


def mp_integral_kernel(a, c, ws, wo):
    # -2 coth(pi ws) F_a(wo) + 2/(pi ws) F_a(wo + c ws) at 40 digits
    mp.mp.dps = 40
    Fa = lambda x: mp.sinh(2 * mp.pi * x) / (mp.cosh(2 * mp.pi * x) - mp.cos(2 * mp.pi * a))
    ws, wo = mp.mpf(ws), mp.mpf(wo)
    return float(-2 * mp.coth(mp.pi * ws) * Fa(wo) + 2 / (mp.pi * ws) * Fa(wo + c * ws))


@pytest.mark.parametrize("ws", [0.0, 1e-8, 3e-4, -7e-4, REMOVABLE_EPS * 0.999, REMOVABLE_EPS * 1.001, 0.05])
def test_alpha1_integral_kernel_near_removable_point(ws):
    Q, al = QuadraticForm(2, 1, 3), AlphaShift(F(0), F(1, 3))
    c, wo = 1 / 6, 0.37
    ref = mp_integral_kernel(mp.mpf(1) / 3, mp.mpf(1) / 6, ws if ws else 1e-30, wo)
    # the regrouped form below REMOVABLE_EPS is exact to O(ws^2)
    assert kernel_g(Q, al, ws, wo) == pytest.approx(ref, abs=1e-7)


def test_alpha1_integral_kernel_two_scale():
    Q, al = QuadraticForm(1, 1, 1), AlphaShift(F(0), F(1, 3))
    # linear extrapolation from the far side of the switch down to w1 = 1e-6
    g1, g2 = kernel_g(Q, al, 1e-3, 0.5), kernel_g(Q, al, 2e-3, 0.5)
    extrap = g1 + (g1 - g2) / 1e-3 * (1e-3 - 1e-6)
    small = kernel_g(Q, al, 1e-6, 0.5)
    assert abs(small - extrap) < 1e-4 * abs(small)


def test_alpha2_integral_kernel_mirror():
    # alpha2 integral: the roles of w1 and w2 swap, with c = a2 / (2 a1)
    Q, al = QuadraticForm(2, 1, 3), AlphaShift(F(1, 3), F(0))
    for ws, wo in ((0.2, -0.4), (1e-5, 0.8)):
        ref = mp_integral_kernel(mp.mpf(1) / 3, mp.mpf(1) / 4, ws, wo)
        assert kernel_g(Q, al, wo, ws) == pytest.approx(ref, abs=1e-8)


def test_kernel_both_integral_rejected():
    with pytest.raises(DomainError):
        kernel_g(QuadraticForm(1, 1, 1), AlphaShift(1, 0), 0.3, 0.2)
    with pytest.raises(DomainError):
        h_alpha_kernel(QuadraticForm(1, 1, 1), AlphaShift(0, 0), 1.0)
    with pytest.raises(DomainError):
        h_alpha_kernel(QuadraticForm(1, 1, 1), AlphaShift(F(1, 3), F(1, 3)), 0.0)


def test_diagonalised():
    Q = QuadraticForm(2, 1, 3)
    for w1, w2, s in ((0.3, -1.2, 1), (2.0, 0.5, -1)):
        lhs, rhs = diagonalised(Q, w1, w2, s)
        assert lhs == pytest.approx(rhs, abs=1e-13)


def test_h_alpha_kernel_factorises_for_diagonal_form():
    # Q = w1^2 + w2^2: the F F term is odd and drops, the G G term is a product of 1D integrals
    Q, v = QuadraticForm(1, 0, 1), 1.0
    a1, a2 = F(1, 3), F(1, 5)
    one = lambda a: integrate.quad(lambda w: kernel_G(a, w) * math.exp(-2 * math.pi * v * w * w),
                                   -np.inf, np.inf, epsabs=1e-13)[0]
    res = h_alpha_kernel(Q, AlphaShift(a1, a2), v)
    assert abs(res.value.real - 2 * one(a1) * one(a2)) < 1e-8
    assert abs(res.value.imag) < 10 * res.err_est


def test_h_alpha_kernel_integral_diagonal_vanishes():
    # a2 = 0 and alpha1 integral: every term is odd in w2
    res = h_alpha_kernel(QuadraticForm(1, 0, 1), AlphaShift(F(0), F(1, 3)), 1.0)
    assert abs(res.value.real) < 1e-8


def test_h_alpha_kernel_shift_invariant():
    Q = QuadraticForm(1, 1, 1)
    a = h_alpha_kernel(Q, AlphaShift(F(1, 3), F(1, 3)), 1.0).value
    b = h_alpha_kernel(Q, AlphaShift(F(4, 3), F(-2, 3)), 1.0).value
    assert a == b


def test_h_alpha_kernel_real_and_complex_agree():
    Q, al = QuadraticForm(2, 1, 3), AlphaShift(F(1, 4), F(2, 3))
    c = h_alpha_kernel(Q, al, 0.5)
    r = h_alpha_kernel(Q, al, 0.5, complex_kernel=False)
    assert abs(c.value.real - r.value.real) < c.err_est + r.err_est + 1e-12
