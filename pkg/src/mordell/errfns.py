"""One- and two-dimensional generalised error functions.

``E(u) = 2 int_0^u exp(-pi w^2) dw`` and its complement ``M(u)``; the
double error function ``E2(kappa; u)`` and its complement ``M2``.  ``M2``
is available along two independent routes:

* the contour integral over ``(R - i u2) x (R - i u1)``, parametrised by
  ``w_j = t_j - i u_j``.  The ``t1`` integral is done in closed form with
  the Faddeeva function, the ``t2`` integral adaptively;
* the relation ``M2 = E2 - sgn(u2) M(u1) - sgn(u1 - kappa u2) M(...) -
  sgn(u1) sgn(u2 + kappa u1)``, which also extends ``M2`` to the loci
  ``u2 = 0`` and ``u1 = kappa u2`` (``sgn(0) = 0``).

Lattice sums need ``exp(pi |u|^2) M2(kappa; u)`` for large ``|u|``.  The
contour route produces this scaled value directly.  The relation route
cancels ``O(1)`` terms down to ``exp(-pi |u|^2)`` and is therefore run in
``mpmath`` at a working precision chosen from ``|u|``.
"""

from __future__ import annotations

import functools
import math
from typing import Optional, Tuple

import mpmath as mp
import numpy as np
from scipy import special

from .errors import DomainError
from .quad import QuadratureResult, Tolerance, integrate_1d

__all__ = [
    "err_E",
    "err_M",
    "err_M_contour",
    "err_E2",
    "err_M2_contour",
    "m2_contour",
    "err_M2",
    "m2_relation_scaled",
    "LOCUS_BAND",
]

SQRT_PI = math.sqrt(math.pi)
# arguments closer than this to a locus are treated as on it by the contour route
LOCUS_BAND = 1e-12
# Gaussian cut-off for |t| (exp(-pi T^2) ~ 1e-49)
_T_CUT = 6.0

Signs = Tuple[int, int, int, int]


def _sgn(x) -> int:
    x = float(x)
    return (x > 0) - (x < 0)


def err_E(u):
    """``2 int_0^u exp(-pi w^2) dw = erf(sqrt(pi) u)``."""
    return special.erf(SQRT_PI * np.asarray(u, dtype=float)) if np.ndim(u) else float(
        special.erf(SQRT_PI * u))


def _M_ext(u: float) -> float:
    # E(u) - sgn(u) without cancellation; equals 0 at u = 0
    if u == 0:
        return 0.0
    return -_sgn(u) * float(special.erfc(SQRT_PI * abs(u)))


def err_M_contour(u: float, tol: Optional[Tolerance] = None) -> QuadratureResult:
    """The defining contour integral of ``M(u)``, returned with its error estimate.

    On ``w = t - i u`` the integrand is ``exp(-pi u^2) exp(-pi t^2) / (t - i u)``;
    the imaginary part of the returned value is pure quadrature noise.
    """
    if u == 0:
        raise DomainError("M(u) is undefined at u = 0")
    tol = tol or Tolerance(1e-13, 1e-12)

    def f(t):
        return np.exp(-np.pi * t * t) / (t - 1j * u)

    res = integrate_1d(f, -_T_CUT, _T_CUT, tol.scaled(0.5), points=(0.0,))
    pref = 1j / math.pi * math.exp(-math.pi * u * u)
    tail = math.exp(-math.pi * _T_CUT**2) / (math.pi * abs(u))
    return QuadratureResult(pref * res.value, abs(pref) * (res.err_est + tail),
                            res.n_evals, res.converged)


def err_M(u: float, path: str = "relation") -> float:
    """``M(u) = E(u) - sgn(u)`` for ``u != 0``.

    ``path="contour"`` evaluates the contour integral instead of the
    relation.
    """
    if u == 0:
        raise DomainError("M(u) is undefined at u = 0")
    if path == "relation":
        return _M_ext(u)
    if path == "contour":
        return float(err_M_contour(u).value.real)
    raise ValueError(f"unknown path {path!r}")


def err_E2(kappa: float, u1: float, u2: float, tol: Optional[Tolerance] = None) -> float:
    """Double error function ``E2(kappa; u1, u2)``.

    Integrating the Gaussian across each line ``w2 = -kappa w1`` in closed
    form leaves ``int sgn(w1) exp(-pi (w1 - u1)^2) E(u2 + kappa w1) dw1``,
    which is split at ``w1 = 0`` (the other sector boundary).
    """
    tol = tol or Tolerance(1e-14, 1e-13)

    def f(w1):
        return np.sign(w1) * np.exp(-np.pi * (w1 - u1) ** 2) * special.erf(
            SQRT_PI * (u2 + kappa * w1))

    lo, hi = u1 - _T_CUT, u1 + _T_CUT
    res = integrate_1d(f, lo, hi, tol, points=(0.0,))
    return float(res.value.real)


def _contour_integral(kappa, u1, u2, tol):
    # int dt2 exp(-pi t2^2)/(t2 - i u2) * int dt1 exp(-pi t1^2)/(t1 - c), c = kappa t2 + i beta
    beta = u1 - kappa * u2

    def f(t2):
        z = SQRT_PI * (kappa * t2 + 1j * beta)
        inner = 1j * np.pi * special.wofz(z) if beta > 0 else -1j * np.pi * special.wofz(-z)
        return np.exp(-np.pi * t2 * t2) / (t2 - 1j * u2) * inner

    res = integrate_1d(f, -_T_CUT, _T_CUT, tol, points=(0.0,))
    tail = math.exp(-math.pi * _T_CUT**2) / (math.pi * _T_CUT * abs(u2))
    return res, tail


def m2_contour(kappa: float, u1: float, u2: float, tol: Optional[Tolerance] = None,
               scaled: bool = False) -> QuadratureResult:
    """Contour evaluation of ``M2`` as a complex :class:`QuadratureResult`.

    With ``scaled=True`` the value is ``exp(pi (u1^2 + u2^2)) M2``, which
    stays ``O(1/|u|^2)`` where ``M2`` itself underflows.
    """
    beta = u1 - kappa * u2
    if u2 == 0 or beta == 0:
        raise DomainError("contour definition of M2 needs u2 != 0 and u1 - kappa u2 != 0")
    tol = tol or Tolerance(1e-12, 1e-11)
    res, tail = _contour_integral(kappa, u1, u2, tol.scaled(0.5))
    pref = -1.0 / math.pi**2
    if not scaled:
        pref *= math.exp(-math.pi * (u1 * u1 + u2 * u2))
    return QuadratureResult(pref * res.value, abs(pref) * (res.err_est + tail),
                            res.n_evals, res.converged)


def err_M2_contour(kappa: float, u1: float, u2: float, tol: Optional[Tolerance] = None) -> float:
    """``M2`` from its contour integral (real part; see :func:`m2_contour`).

    Arguments within ``LOCUS_BAND`` of a locus are routed to the relation
    path, where the contour integrand is too ill-conditioned.
    """
    beta = u1 - kappa * u2
    if u2 == 0 or beta == 0:
        raise DomainError("contour definition of M2 needs u2 != 0 and u1 - kappa u2 != 0")
    if abs(u2) < LOCUS_BAND or abs(beta) < LOCUS_BAND:
        return err_M2(kappa, u1, u2)
    return float(m2_contour(kappa, u1, u2, tol).value.real)


def err_M2(kappa: float, u1: float, u2: float, signs: Optional[Signs] = None,
           tol: Optional[Tolerance] = None) -> float:
    """Extended ``M2`` through the relation with ``E2``, ``M`` and ``sgn``.

    ``signs`` optionally overrides ``(sgn u1, sgn u2, sgn(u1 - kappa u2),
    sgn(u2 + kappa u1))`` with exact values (lattice callers know them
    from rationals).  ``M`` terms with zero weight are skipped; an ``M``
    evaluated at ``0`` takes the value ``E(0) - sgn(0) = 0``.
    """
    s1, s2, sb, sk = signs if signs is not None else (
        _sgn(u1), _sgn(u2), _sgn(u1 - kappa * u2), _sgn(u2 + kappa * u1))
    val = err_E2(kappa, u1, u2, tol)
    # an exact zero sign pins the matching M argument to 0
    if s2 and s1:
        val -= s2 * _M_ext(u1)
    if sb and sk:
        val -= sb * _M_ext((u2 + kappa * u1) / math.sqrt(1 + kappa * kappa))
    val -= s1 * sk
    return float(val)


# --- high precision relation path -------------------------------------------

def _owen_t(h, theta_max):
    # T(h, tan(theta_max)) = exp(-h^2/2)/(2 pi) int_0^theta_max exp(-h^2 tan^2/2)
    if theta_max == 0:
        return mp.mpf(0)
    h2 = h * h / 2
    core = mp.quad(lambda th: mp.exp(-h2 * mp.tan(th) ** 2), [0, theta_max])
    return mp.exp(-h2) * core / (2 * mp.pi)


def _bvn(h, k, rho):
    """``P(X > -h, Y > -k)`` for standard normals with correlation ``rho``."""
    if h == 0 and k == 0:
        return mp.mpf(1) / 4 + mp.asin(rho) / (2 * mp.pi)
    sr = mp.sqrt(1 - rho * rho)

    def arm(x, y):
        if x == 0:
            return mp.mpf(0)
        return _owen_t(x, mp.atan((y - rho * x) / (x * sr)))

    def arm0(y):
        # x == 0: a = sgn(y) * inf
        return _sgn(y) * mp.mpf(1) / 4

    t_h = arm0(k) if h == 0 else arm(h, k)
    t_k = arm0(h) if k == 0 else arm(k, h)
    if h * k > 0 or (h * k == 0 and h + k >= 0):
        delta = 0
    else:
        delta = mp.mpf(1) / 2
    return (mp.ncdf(h) + mp.ncdf(k)) / 2 - t_h - t_k - delta


def _E2_mp(kappa, u1, u2, s1, sk):
    q = mp.sqrt(1 + kappa * kappa)
    rho = kappa / q
    h = mp.sqrt(2 * mp.pi) * u1 if s1 else mp.mpf(0)
    k = mp.sqrt(2 * mp.pi) * (u2 + kappa * u1) / q if sk else mp.mpf(0)
    return 1 - 2 * mp.ncdf(h) - 2 * mp.ncdf(k) + 4 * _bvn(h, k, rho)


def _M_mp(u):
    if u == 0:
        return mp.mpf(0)
    return mp.erf(mp.sqrt(mp.pi) * u) - _sgn(u)


@functools.lru_cache(maxsize=65536)
def m2_relation_scaled(kappa: float, u1: float, u2: float, signs: Optional[Signs] = None,
                       digits: int = 20) -> float:
    """``exp(pi |u|^2) M2(kappa; u)`` from the relation, in extended precision.

    The working precision is ``digits + pi |u|^2 / ln 10`` decimal digits,
    enough to absorb the cancellation of the ``O(1)`` terms.  ``E2`` is
    evaluated through the bivariate normal law and Owen's T function
    (``x = tan(theta)`` form), independently of the double precision path.
    """
    s1, s2, sb, sk = signs if signs is not None else (
        _sgn(u1), _sgn(u2), _sgn(u1 - kappa * u2), _sgn(u2 + kappa * u1))
    r2 = u1 * u1 + u2 * u2
    dps = int(digits + math.pi * r2 / math.log(10)) + 5
    with mp.workdps(dps):
        K, U1, U2 = mp.mpf(kappa), mp.mpf(u1), mp.mpf(u2)
        val = _E2_mp(K, U1, U2, s1, sk)
        if s2 and s1:
            val -= s2 * _M_mp(U1)
        if sb and sk:
            val -= sb * _M_mp((U2 + K * U1) / mp.sqrt(1 + K * K))
        val -= s1 * sk
        return float(val * mp.exp(mp.pi * (U1 * U1 + U2 * U2)))
