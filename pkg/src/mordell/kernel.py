"""Kernel side of ``H_alpha(i v)``: the functions F, G and the weighted plane integral.

``F_a(x) = sinh(2 pi x) / (cosh(2 pi x) - cos(2 pi a))`` and
``G_a(x) = sin(2 pi a) / (cosh(2 pi x) - cos(2 pi a))`` are the real and
imaginary parts of ``cot(pi a + pi i x) = G_a(x) - i F_a(x)``.

The kernel ``g_alpha`` depends on which components of ``alpha`` are
integral:

* generic: ``2 G G - 2 F F``;
* ``alpha1`` integral: ``-2 F_0(w1) F_{a2}(w2) + (2 / (pi w1)) F_{a2}(w2 + c w1)``
  with ``c = a2 / (2 a3)``, the ``1/w1`` poles of the two terms cancelling;
* ``alpha2`` integral: the mirror image with ``c = a2 / (2 a1)``.

:func:`h_alpha_kernel` integrates the complex kernel (the full product of
cotangents, or ``F + i G`` in the integral cases) so that the vanishing of
the imaginary part is an actual numerical check.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError
from .forms import AlphaCase, AlphaShift, QuadraticForm
from .quad import QuadratureResult, Tolerance, integrate_plane_gaussian

__all__ = [
    "kernel_F",
    "kernel_G",
    "kernel_F_prime",
    "kernel_F_second",
    "cot_split_check",
    "kernel_g",
    "kernel_g_complex",
    "h_alpha_kernel",
    "diagonalised",
    "REMOVABLE_EPS",
]

# |w| below which the alpha-integral kernels switch to the regrouped series form
REMOVABLE_EPS = 1e-3
TWO_PI = 2 * math.pi


def _is_integer(a) -> bool:
    return float(a) == math.floor(float(a))


def _den(a, x):
    # cosh(2 pi x) - cos(2 pi a) = 2 sinh^2(pi x) + 2 sin^2(pi a), no cancellation near 0
    return 2 * np.sinh(np.pi * x) ** 2 + 2 * math.sin(math.pi * float(a)) ** 2


def kernel_F(a, x):
    """``F_a(x) = sinh(2 pi x) / (cosh(2 pi x) - cos(2 pi a))``.

    Odd in ``x``, even and 1-periodic in ``a``.  Undefined for integral
    ``a`` at ``x = 0``; for ``a = 0`` it equals ``coth(pi x)``.
    """
    x = np.asarray(x, dtype=float)
    if _is_integer(a):
        if np.any(x == 0):
            raise DomainError("F_a(0) is undefined for integral a")
        out = 1.0 / np.tanh(np.pi * x)
    else:
        big = np.abs(x) > 20
        xs = np.where(big, 0.0, x)
        out = np.where(big, np.sign(x), np.sinh(TWO_PI * xs) / _den(a, xs))
    return float(out) if out.ndim == 0 else out


def kernel_G(a, x):
    """``G_a(x) = sin(2 pi a) / (cosh(2 pi x) - cos(2 pi a))``; even in ``x``, zero for integral ``a``."""
    x = np.asarray(x, dtype=float)
    if _is_integer(a):
        if np.any(x == 0):
            raise DomainError("G_a(0) is undefined for integral a")
        out = np.zeros_like(x)
    else:
        out = math.sin(TWO_PI * float(a)) / _den(a, np.minimum(np.abs(x), 100.0))
    return float(out) if out.ndim == 0 else out


def kernel_F_prime(a, x):
    """``d F_a / dx = 2 pi (1 - C cosh(2 pi x)) / (cosh(2 pi x) - C)^2``, ``C = cos(2 pi a)``."""
    x = np.asarray(x, dtype=float)
    C = math.cos(TWO_PI * float(a))
    xs = np.minimum(np.abs(x), 20.0)
    ch = np.cosh(TWO_PI * xs)
    out = TWO_PI * (1 - C * ch) / _den(a, xs) ** 2
    return float(out) if out.ndim == 0 else out


def kernel_F_second(a, x):
    """``d^2 F_a / dx^2 = 4 pi^2 sinh(2 pi x) (C cosh(2 pi x) + C^2 - 2) / (cosh(2 pi x) - C)^3``."""
    x = np.asarray(x, dtype=float)
    C = math.cos(TWO_PI * float(a))
    xs = np.clip(x, -20.0, 20.0)
    ch = np.cosh(TWO_PI * xs)
    out = 4 * math.pi**2 * np.sinh(TWO_PI * xs) * (C * ch + C * C - 2) / _den(a, xs) ** 3
    return float(out) if out.ndim == 0 else out


def cot_split_check(x: float, y: float) -> Tuple[float, float]:
    """Real and imaginary part of ``cot(x + i y)`` from the split

    ``-sin(2x) / (cos(2x) - cosh(2y)) + i sinh(2y) / (cos(2x) - cosh(2y))``.
    """
    den = math.cos(2 * x) - math.cosh(2 * y)
    if den == 0:
        raise DomainError(f"cot has a pole at {x} + {y}i")
    return -math.sin(2 * x) / den, math.sinh(2 * y) / den


def _coth_minus_pole(x):
    # coth(pi x) - 1/(pi x), series for small |x|
    x = np.asarray(x, dtype=float)
    px = np.pi * x
    small = np.abs(px) < 1e-2
    safe = np.where(small, 1.0, px)
    direct = 1.0 / np.tanh(safe) - 1.0 / safe
    series = px / 3 - px**3 / 45 + 2 * px**5 / 945
    return np.where(small, series, direct)


def _integral_kernel(a_other, c, ws, wo, complex_out):
    """Kernel with the integral component on variable ``ws`` and the other on ``wo``.

    ``-2 F_0(ws) K(wo) + (2 / (pi ws)) K(wo + c ws)`` with ``K = F + i G``
    (or ``K = F`` for the real kernel).  For ``|ws| < REMOVABLE_EPS`` the
    regrouped form ``-2 (F_0(ws) - 1/(pi ws)) K(wo) + (2/pi) (K(wo + c ws) - K(wo)) / ws``
    is used, with the difference quotient expanded to second order.
    """
    ws, wo = np.broadcast_arrays(np.asarray(ws, dtype=float), np.asarray(wo, dtype=float))

    def K(x):
        val = kernel_F(a_other, x)
        return val + 1j * kernel_G(a_other, x) if complex_out else val

    small = np.abs(ws) < REMOVABLE_EPS
    wsafe = np.where(small, 1.0, ws)
    far = -2 / np.tanh(np.pi * wsafe) * K(wo) + 2 / (np.pi * wsafe) * K(wo + c * wsafe)
    dq = c * kernel_F_prime(a_other, wo) + 0.5 * c * c * ws * kernel_F_second(a_other, wo)
    if complex_out:
        h = 1e-4
        g0, gp, gm = (kernel_G(a_other, wo + s) for s in (0.0, h, -h))
        dq = dq + 1j * (c * (gp - gm) / (2 * h) + 0.5 * c * c * ws * (gp - 2 * g0 + gm) / h**2)
    near = -2 * _coth_minus_pole(ws) * K(wo) + 2 / np.pi * dq
    out = np.where(small, near, far)
    return out[()] if out.ndim == 0 else out


def _prepare(Q: QuadraticForm, alpha: AlphaShift):
    case = alpha.case
    if case is AlphaCase.BOTH_INTEGRAL:
        raise DomainError("no kernel is available for alpha in Z^2")
    al = alpha.reduced()
    return case, float(al.alpha1), float(al.alpha2)


def kernel_g_complex(Q: QuadraticForm, alpha: AlphaShift, w1, w2):
    """Complex kernel whose real part is ``g_alpha``.

    Generic case: ``2 cot(pi a1 + pi i w1) cot(pi a2 + pi i w2)``; the
    imaginary part ``-2 (G1 F2 + F1 G2)`` is odd under ``w -> -w``.
    Integral cases: ``F`` replaced by ``F + i G`` in the non-integral
    component, whose ``G`` part is again odd overall.
    ``w1`` is a scalar, ``w2`` a scalar or array.
    """
    case, a1, a2 = _prepare(Q, alpha)
    if case is AlphaCase.GENERIC:
        c1 = kernel_G(a1, w1) - 1j * kernel_F(a1, w1)
        c2 = kernel_G(a2, w2) - 1j * kernel_F(a2, w2)
        return 2 * c1 * c2
    if case is AlphaCase.ALPHA1_INTEGRAL:
        return _integral_kernel(a2, Q.a2 / (2 * Q.a3), w1, w2, True)
    return _integral_kernel(a1, Q.a2 / (2 * Q.a1), w2, w1, True)


def kernel_g(Q: QuadraticForm, alpha: AlphaShift, w1, w2):
    """The real kernel ``g_alpha(w)`` in each admissible case of ``alpha``."""
    case, a1, a2 = _prepare(Q, alpha)
    if case is AlphaCase.GENERIC:
        return 2 * kernel_G(a1, w1) * kernel_G(a2, w2) - 2 * kernel_F(a1, w1) * kernel_F(a2, w2)
    if case is AlphaCase.ALPHA1_INTEGRAL:
        return _integral_kernel(a2, Q.a2 / (2 * Q.a3), w1, w2, False)
    return _integral_kernel(a1, Q.a2 / (2 * Q.a1), w2, w1, False)


def h_alpha_kernel(Q: QuadraticForm, alpha: AlphaShift, v: float,
                   tol: Optional[Tolerance] = None, complex_kernel: bool = True) -> QuadratureResult:
    """``H_alpha(i v) = int_{R^2} g_alpha(w) exp(-2 pi v Q(w)) dw``.

    With ``complex_kernel`` the complex kernel of :func:`kernel_g_complex`
    is integrated; its imaginary part must vanish to within ``err_est``.
    """
    if not v > 0:
        raise DomainError("v must be positive")
    tol = tol or Tolerance(1e-9, 1e-9)
    _prepare(Q, alpha)
    g = kernel_g_complex if complex_kernel else kernel_g

    def f(w1, w2):
        return g(Q, alpha, w1, w2)

    # breakpoints at w1 = 0 (outer) and w2 = 0 (inner) cover the kinks of F, G
    return integrate_plane_gaussian(f, v, Q, tol, outer_points=(0.0,), inner_points=lambda w1: [0.0])


def diagonalised(Q: QuadraticForm, w1: float, w2: float, sign: int = 1) -> Tuple[float, float]:
    """Both sides of ``a3 w2^2 + s a2 w1 w2 + a1 w1^2 = a3 (w2 + s c w1)^2 + (a1 - a2^2/(4 a3)) w1^2``."""
    a1, a2, a3 = Q.a1, Q.a2, Q.a3
    lhs = a3 * w2 * w2 + sign * a2 * w1 * w2 + a1 * w1 * w1
    rhs = a3 * (w2 + sign * a2 / (2 * a3) * w1) ** 2 + (a1 - a2 * a2 / (4 * a3)) * w1 * w1
    return lhs, rhs
