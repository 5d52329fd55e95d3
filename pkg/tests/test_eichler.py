import cmath
import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import integrate

from mordell.eichler import (EichlerTermSpec, LowerLimit, M2Path, aitken, double_eichler_E_alpha,
                             eichler_1d, eichler_term, h_alpha_lattice, identity_1d, lattice_term_specs,
                             m2_eichler_term, mordell_h, richardson)
from mordell.errfns import err_M2, m2_relation_scaled
from mordell.errors import DomainError
from mordell.forms import AlphaShift, LatticePoint, QuadraticForm, lattice_box, lattice_signs, u_of_n
from mordell.quad import Tolerance, integrate_wedge
from mordell.theta import theta_1, theta_2


# --- one-dimensional --------------------------------------------------------------

def trapezoid_h(z, tau, W=12.0, n=24001):
    w = np.linspace(-W, W, n)
    f = np.cosh(2 * np.pi * z * w) / np.cosh(np.pi * w) * np.exp(1j * np.pi * tau * w * w)
    return integrate.trapezoid(f, w)


@pytest.mark.parametrize("z,tau", [(0.0, 1j), (0.2 - 0.1j, 1j), (0.3 + 0.2j, 0.5 + 2j), (-0.25, 0.5j)])
def test_mordell_h_vs_trapezoid(z, tau):
    res = mordell_h(z, tau)
    assert abs(res.value - trapezoid_h(z, tau)) < 1e-11
    assert res.converged


@pytest.mark.parametrize("z,tau", [(0.1 + 0.05j, 1j), (-0.3, 0.2 + 1.3j)])
def test_mordell_h_functional_equations(z, tau):
    h = lambda x: mordell_h(x, tau).value
    # h(z) + h(z + 1) = 2 / sqrt(-i tau) exp(pi i (z + 1/2)^2 / tau)
    rhs1 = 2 / cmath.sqrt(-1j * tau) * cmath.exp(1j * math.pi * (z + 0.5) ** 2 / tau)
    assert abs(h(z) + h(z + 1) - rhs1) < 1e-10
    # h(z) + exp(-2 pi i z - pi i tau) h(z + tau) = 2 exp(-pi i z - pi i tau / 4)
    lhs2 = h(z) + cmath.exp(-2j * math.pi * z - 1j * math.pi * tau) * h(z + tau)
    assert abs(lhs2 - 2 * cmath.exp(-1j * math.pi * z - 1j * math.pi * tau / 4)) < 1e-10


@pytest.mark.parametrize("a,b,tau", [(1 / 4, 1 / 4, 2j), (0.0, 0.0, 1j), (2 / 5, 1 / 3, 1j),
                                     (-0.3, 0.2, 0.3 + 1j)])
def test_identity_1d_interior(a, b, tau):
    lhs, rhs = identity_1d(a, b, tau)
    assert abs(lhs - rhs) < 1e-9


def test_identity_1d_boundary_is_average():
    # h(a tau - b) is continuous at a = 1/2; the integral side jumps there and
    # takes the mean of its one-sided limits, so the identity fails exactly at a = 1/2
    tau, eps = 0.5j, 1e-7
    lo, mid, hi = (identity_1d(a, 0.0, tau) for a in (0.5 - eps, 0.5, 0.5 + eps))
    assert abs(lo[0] - lo[1]) < 1e-9
    assert abs(lo[0] - mid[0]) < 1e-6 and abs(hi[0] - mid[0]) < 1e-6
    assert abs(mid[1] - 0.5 * (lo[1] + hi[1])) < 1e-6
    assert abs(mid[0] - mid[1]) > 0.5


def test_eichler_1d_methods_agree():
    d = eichler_1d(0.3, 0.1, 1j)
    t = eichler_1d(0.3, 0.1, 1j, method="termwise", delta=1e-3)
    assert abs(d.value - t.value) <= d.err_est + t.err_est + 1e-12
    with pytest.raises(ValueError):
        eichler_1d(0.3, 0.1, 1j, method="simpson")


# --- double Eichler terms ------------------------------------------------------------

def brute_term(c1, c2, L, zeta):
    def f(t2, t1, part):
        val = cmath.exp(1j * math.pi * (c1 * (L + 1j * t1) + c2 * (L + 1j * t2))) / (
            cmath.sqrt(t1 + zeta) * cmath.sqrt(t2 + zeta))
        return val.real if part == 0 else val.imag

    return complex(*(integrate.dblquad(f, 0, 40, lambda t1: t1, lambda t1: 60, args=(p,),
                                       epsabs=1e-12, epsrel=1e-10)[0] for p in (0, 1)))


@pytest.mark.parametrize("c1,c2,lower,tau", [
    (1.0, 2.0, LowerLimit.ZERO, 1j),
    (0.5, 1.5, LowerLimit.MINUS_CONJ_TAU, 1j),
    (2.0, 0.7, LowerLimit.MINUS_CONJ_TAU, 0.3 + 0.8j),
])
def test_eichler_term_vs_dblquad(c1, c2, lower, tau):
    spec = EichlerTermSpec(c1, c2, lower, tau)
    res = eichler_term(spec)
    assert abs(res.value - brute_term(c1, c2, spec.L, spec.zeta)) < 1e-8


def test_eichler_term_vs_wedge():
    spec = EichlerTermSpec(0.8, 1.1, LowerLimit.ZERO, 1j)
    f = lambda t1, t2: np.exp(-np.pi * (0.8 * t1 + 1.1 * t2)) / np.sqrt((t1 + 1) * (t2 + 1))
    ref = integrate_wedge(f, (1 / (0.8 * np.pi), 1 / (1.1 * np.pi)), Tolerance(1e-12, 1e-11))
    assert abs(eichler_term(spec).value - ref.value) < 1e-9


def test_eichler_term_monotone_in_c1():
    vals = [eichler_term(EichlerTermSpec(c1, 1.0, LowerLimit.ZERO, 1j)).value.real for c1 in (0.5, 1, 2, 4)]
    assert all(x > y > 0 for x, y in zip(vals, vals[1:]))


def test_eichler_term_domain():
    with pytest.raises(DomainError):
        eichler_term(EichlerTermSpec(1.0, 0.0, LowerLimit.ZERO, 1j))
    with pytest.raises(DomainError):
        EichlerTermSpec(-1.0, 1.0, LowerLimit.ZERO, 1j)


def test_lower_limits_related():
    # from -conj(i v) the path is i(v + t); from 0 at tau = 2 i v the radicands agree
    c1, c2, v = 0.6, 1.3, 0.7
    a = eichler_term(EichlerTermSpec(c1, c2, LowerLimit.MINUS_CONJ_TAU, 1j * v)).value
    b = eichler_term(EichlerTermSpec(c1, c2, LowerLimit.ZERO, 2j * v)).value
    assert a == pytest.approx(math.exp(-math.pi * (c1 + c2) * v) * b, rel=1e-10)


@pytest.mark.parametrize("form,n,v", [
    ((1, 1, 1), (F(1, 3), F(1, 3)), 1.0),
    ((2, 1, 3), (F(-3, 4), F(-1, 3)), 0.5),
    ((1, 0, 1), (F(1, 4), F(-3, 4)), 2.0),
])
def test_m2_eichler_term(form, n, v):
    Q = QuadraticForm(*form)
    p = LatticePoint(*n)
    u1, u2 = u_of_n(Q, p)
    ref = err_M2(Q.kappa, math.sqrt(v) * u1, math.sqrt(v) * u2, lattice_signs(Q, p))
    assert abs(m2_eichler_term(Q, p, 1j * v) - ref) < 1e-9


def test_m2_eichler_term_origin():
    assert m2_eichler_term(QuadraticForm(1, 1, 1), (0, 0), 1j) == 0


def test_lattice_term_specs():
    (P1, c11, c21), (P2, c12, c22) = lattice_term_specs(QuadraticForm(1, 1, 1), (F(1, 3), F(1, 3)))
    assert P1 == pytest.approx(math.sqrt(3) / 6)
    assert c11 == pytest.approx(0.5) and c21 == pytest.approx(1 / 6)
    assert P2 == pytest.approx(P1) and c12 == pytest.approx(c11)


# --- E_alpha ----------------------------------------------------------------------------

def test_E_alpha_matches_M2_sum():
    Q, al, v = QuadraticForm(1, 1, 1), AlphaShift(F(1, 3), F(1, 5)), 1.0
    E = double_eichler_E_alpha(Q, al, 1j * v)
    ref = 0.0
    for n in lattice_box(al.reduced(), 4):
        u1, u2 = u_of_n(Q, n)
        Qn = float(Q.a1 * n.n1**2 + Q.a2 * n.n1 * n.n2 + Q.a3 * n.n2**2)
        # exp(2 pi v Q) M2 = exp(-2 pi v Q) * [exp(4 pi v Q) M2], the latter in high precision
        scaled = m2_relation_scaled(Q.kappa, math.sqrt(v) * u1, math.sqrt(v) * u2, lattice_signs(Q, n))
        ref += 0.5 * math.exp(-2 * math.pi * v * Qn) * scaled
    assert abs(E - ref) < 1e-9


def test_E_alpha_ring_convergence():
    E4 = double_eichler_E_alpha(QuadraticForm(2, 1, 3), AlphaShift(F(1, 4), F(2, 3)), 0.5j, r_max=4)
    E6 = double_eichler_E_alpha(QuadraticForm(2, 1, 3), AlphaShift(F(1, 4), F(2, 3)), 0.5j, r_max=6)
    assert abs(E4 - E6) < 1e-10


def test_E_alpha_vs_theta_wedge():
    # the E_alpha definition as a wedge integral of the binary theta series
    Q, al = QuadraticForm(1, 0, 1), AlphaShift(F(1, 2), F(1, 2))
    v = 1.0

    def f(t1, t2s):
        out = np.empty(np.shape(t2s), dtype=complex)
        for i, t2 in enumerate(np.ravel(t2s)):
            w1, w2 = 1j * (v + t1), 1j * (v + t2)
            th = theta_1(Q, al, w1, w2, 1e-13) + theta_2(Q, al, w1, w2, 1e-13)
            out.flat[i] = th / math.sqrt((t1 + 2 * v) * (t2 + 2 * v))
        return out

    d = 1 / (0.5 * math.pi)
    wedge = integrate_wedge(f, (d, d), Tolerance(1e-9, 1e-8)).value
    E = double_eichler_E_alpha(Q, al, 1j * v)
    assert abs(E - math.sqrt(Q.D) / 4 * wedge) < 1e-7


# --- lattice sums ----------------------------------------------------------------------

def test_richardson_exact_on_polynomials():
    h = 1 / (np.arange(1, 6) + 0.5)
    S = 0.7 + 0.3 * h - 0.2 * h**2 + 0.05 * h**3
    assert abs(richardson(S) - 0.7) < 1e-12


def test_aitken_geometric():
    S = [1 - 0.5**k for k in range(1, 6)]
    assert abs(aitken(S) - 1) < 1e-14


def test_lattice_paths_agree():
    Q, al = QuadraticForm(2, 1, 3), AlphaShift(F(1, 4), F(2, 3))
    c = h_alpha_lattice(Q, al, 0.5, 3, m2_path="contour", check_decrease=False)
    e = h_alpha_lattice(Q, al, 0.5, 3, m2_path=M2Path.EICHLER, check_decrease=False)
    assert abs(c.value - e.value) < 2e-8
    assert len(c.partial_sums) == 3


def test_lattice_extrapolation_stable():
    Q, al = QuadraticForm(1, 1, 1), AlphaShift(F(1, 3), F(1, 3))
    r4 = h_alpha_lattice(Q, al, 1.0, 4)
    r6 = h_alpha_lattice(Q, al, 1.0, 6)
    assert abs(r4.value - r6.value) < 1e-4
    # the raw partial sum is much further off than the extrapolation moves
    assert abs(r6.raw - r6.value) > 10 * abs(r4.value - r6.value)
    assert r6.converged and r6.r_used == 6


def test_lattice_shift_invariance():
    Q = QuadraticForm(1, 1, 1)
    a = h_alpha_lattice(Q, AlphaShift(F(1, 3), F(1, 3)), 1.0, 4)
    b = h_alpha_lattice(Q, AlphaShift(F(-5, 3), F(4, 3)), 1.0, 4)
    assert a.value == b.value


def test_lattice_domain():
    Q = QuadraticForm(1, 1, 1)
    with pytest.raises(DomainError):
        h_alpha_lattice(Q, AlphaShift(1, 0), 1.0)
    with pytest.raises(DomainError):
        h_alpha_lattice(Q, AlphaShift(F(1, 3), F(1, 3)), -1.0)
    with pytest.raises(DomainError):
        h_alpha_lattice(Q, AlphaShift(F(1, 3), F(1, 3)), 1.0, r_max=0)


def test_locus_points_counted():
    # alpha2 integral: the row n2 = 0 lies on the locus u2 = 0
    rep = h_alpha_lattice(QuadraticForm(2, 1, 3), AlphaShift(F(1, 3), F(0)), 0.5, 3, m2_path="eichler",
                          check_decrease=False)
    assert rep.locus_terms >= 7
    assert np.isfinite(rep.locus_discrepancy)
