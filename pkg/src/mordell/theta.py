"""Truncated theta series with explicit tail bounds.

* ``g_{a,b}(tau) = sum_{n in a+Z} n exp(2 pi i b n) q^{n^2/2}``, the unary
  weight 3/2 theta function;
* the binary series ``theta_1``, ``theta_2`` attached to a form ``Q`` and a
  shift ``alpha``, with two independent modular variables ``w1, w2``.

Sums over ``a + Z`` (resp. ``alpha + Z^2``) do not depend on the chosen
representative, so the shift is first reduced to ``(-1/2, 1/2]``; the box
``|n_j - alpha_j| <= N`` is then centred and every omitted point has
``max_j |n_j| >= N + 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

import numpy as np

from .errors import ConvergenceFailure, DomainError
from .forms import AlphaShift, ModularPoint, QuadraticForm

__all__ = ["ThetaTruncation", "unary_theta", "theta_1", "theta_2", "N_CAP"]

# hard cap on the truncation index
N_CAP = 4000

Number = Union[float, Fraction]


@dataclass(frozen=True)
class ThetaTruncation:
    """Truncation index and an upper bound on the modulus of the omitted terms."""

    n_max: int
    tail_bound: float


def _reduce(x: Number) -> float:
    y = x - math.floor(x)
    return float(y - 1 if y > 0.5 else y)


def _as_tau(tau) -> complex:
    t = tau.tau if isinstance(tau, ModularPoint) else complex(tau)
    if not t.imag > 0:
        raise DomainError(f"theta series need Im > 0, got {t}")
    return t


def _unary_tail(v: float, N: int) -> float:
    # sum_{|k| > N} |a + k| exp(-pi v (a + k)^2) with |a| <= 1/2, |a + k| >= k - 1/2
    total = 0.0
    k = N + 1
    while True:
        term = 2 * (k + 0.5) * math.exp(-math.pi * v * (k - 0.5) ** 2)
        total += term
        if term < 1e-18 * total or term == 0.0:
            # remaining terms shrink at least geometrically with ratio below exp(-pi v)
            ratio = math.exp(-math.pi * v * (2 * k))
            return total + term * ratio / (1 - ratio) if ratio < 1 else total
        k += 1


def unary_theta(a: Number, b: Number, tau, tol: float = 1e-14,
                full: bool = False):
    """Unary theta function ``g_{a,b}(tau)``.

    The truncation index ``N`` is the least one whose tail bound
    ``sum_{|k|>N} |n| exp(-pi v n^2)`` is at most ``tol``.  With
    ``full=True`` a ``(value, ThetaTruncation)`` pair is returned.
    """
    t = _as_tau(tau)
    v = t.imag
    ar = _reduce(a)
    N = 1
    while _unary_tail(v, N) > tol:
        N += 1 if N < 16 else N // 4
        if N > N_CAP:
            raise ConvergenceFailure(f"unary theta needs more than {N_CAP} terms at Im tau = {v}")
    k = np.arange(-N, N + 1)
    n = ar + k
    val = np.sum(n * np.exp(2j * np.pi * float(b) * n + 1j * np.pi * t * n * n))
    val = complex(val)
    return (val, ThetaTruncation(N, _unary_tail(v, N))) if full else val


def _binary_sum(alpha: AlphaShift, w1: complex, w2: complex, tol: float,
                coef, c1, c2, weight_bound):
    """Shared engine for theta_1 / theta_2 on the reduced box."""
    y = min(w1.imag, w2.imag)
    if not y > 0:
        raise DomainError("binary theta series need Im w1 > 0 and Im w2 > 0")
    al = alpha.reduced()
    a1f, a2f = float(al.alpha1), float(al.alpha2)
    lam = weight_bound["lam"]
    C = weight_bound["C"]

    def shell_tail(N):
        # 8s points on shell s; |n|^2 >= (s - 1/2)^2, |n|^2 <= 2 (s + 1/2)^2
        total = 0.0
        s = N + 1
        while True:
            term = 8 * s * C * 2 * (s + 0.5) ** 2 * math.exp(-2 * math.pi * y * lam * (s - 0.5) ** 2)
            total += term
            if term <= 1e-18 * total or term == 0.0:
                return total
            s += 1

    N = 1
    while shell_tail(N) > tol:
        N += 1 if N < 16 else N // 4
        if N > N_CAP:
            raise ConvergenceFailure(f"binary theta needs box radius > {N_CAP} at min Im w = {y}")
    k = np.arange(-N, N + 1, dtype=float)
    n1, n2 = np.meshgrid(a1f + k, a2f + k, indexing="ij")
    pre = coef(n1, n2)
    keep = pre != 0.0
    expo = 1j * np.pi * (c1(n1, n2)[keep] * w1 + c2(n1, n2)[keep] * w2)
    val = complex(np.sum(pre[keep] * np.exp(expo)))
    return val, ThetaTruncation(N, shell_tail(N))


def _bounds(Q: QuadraticForm):
    # |coef(n)| <= C |n|^2 and c1 + c2 = 2 Q(n) >= 2 lam |n|^2
    lam = float(np.linalg.eigvalsh(Q.matrix)[0])
    C = (2 * max(Q.a1, Q.a3) + abs(Q.a2)) / min(Q.a1, Q.a3)
    return {"lam": lam, "C": C}


def theta_1(Q: QuadraticForm, alpha: AlphaShift, w1, w2, tol: float = 1e-14,
            full: bool = False):
    """``(1/a1) sum (2 a1 n1 + a2 n2) n2 exp(pi i [(2a1n1+a2n2)^2 w1 + D n2^2 w2] / (2 a1))``.

    Terms with ``n2 = 0`` vanish and are skipped exactly.
    """
    a1, a2, D = Q.a1, Q.a2, Q.D
    val, tr = _binary_sum(
        alpha, complex(w1), complex(w2), tol,
        coef=lambda n1, n2: np.where(n2 == 0, 0.0, (2 * a1 * n1 + a2 * n2) * n2 / a1),
        c1=lambda n1, n2: (2 * a1 * n1 + a2 * n2) ** 2 / (2 * a1),
        c2=lambda n1, n2: D * n2 * n2 / (2 * a1),
        weight_bound=_bounds(Q),
    )
    return (val, tr) if full else val


def theta_2(Q: QuadraticForm, alpha: AlphaShift, w1, w2, tol: float = 1e-14,
            full: bool = False):
    """``(1/a3) sum (a2 n1 + 2 a3 n2) n1 exp(pi i [(a2n1+2a3n2)^2 w1 + D n1^2 w2] / (2 a3))``.

    Terms with ``n1 = 0`` vanish and are skipped exactly.
    """
    a2, a3, D = Q.a2, Q.a3, Q.D
    val, tr = _binary_sum(
        alpha, complex(w1), complex(w2), tol,
        coef=lambda n1, n2: np.where(n1 == 0, 0.0, (a2 * n1 + 2 * a3 * n2) * n1 / a3),
        c1=lambda n1, n2: (a2 * n1 + 2 * a3 * n2) ** 2 / (2 * a3),
        c2=lambda n1, n2: D * n1 * n1 / (2 * a3),
        weight_bound=_bounds(Q),
    )
    return (val, tr) if full else val


def theta_pair(Q: QuadraticForm, alpha: AlphaShift, w1, w2, tol: float = 1e-14) -> Tuple[complex, complex]:
    """``(theta_1, theta_2)`` at the same arguments."""
    return theta_1(Q, alpha, w1, w2, tol), theta_2(Q, alpha, w1, w2, tol)
