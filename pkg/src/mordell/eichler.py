"""Eichler integrals, the classical Mordell integral and lattice sums for ``H_alpha``.

Conventions
-----------
Paths are vertical: ``w = L + i t`` with ``t >= 0``.  On such a path
``-i (w + tau) = t + zeta`` with ``zeta = -i (L + tau)``, whose real part
is ``Im(L + tau) > 0``, so the principal square root never meets its
branch cut.  The double integrals in :func:`eichler_term` are returned in
parameter form ``int dt1 int dt2`` (no ``i^2 = -1`` from ``dw1 dw2``).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .errfns import m2_contour, m2_relation_scaled
from .errors import ConvergenceFailure, DomainError, NonConvergence
from .forms import (AlphaCase, AlphaShift, LatticePoint, ModularPoint, QuadraticForm,
                    lattice_signs, ring_order, u_of_n)
from .quad import QuadratureResult, Tolerance, integrate_1d, integrate_halfline
from .theta import unary_theta

__all__ = [
    "LowerLimit",
    "EichlerTermSpec",
    "M2Path",
    "LatticeSumReport",
    "mordell_h",
    "eichler_1d",
    "identity_1d",
    "eichler_term",
    "lattice_term_specs",
    "m2_eichler_term",
    "h_alpha_lattice",
    "double_eichler_E_alpha",
    "richardson",
    "aitken",
]


class LowerLimit(enum.Enum):
    MINUS_CONJ_TAU = "minus-conj-tau"
    ZERO = "zero"


class M2Path(enum.Enum):
    CONTOUR = "contour"
    RELATION = "relation"
    EICHLER = "eichler"


def _tau(tau) -> complex:
    return ModularPoint(tau.tau if isinstance(tau, ModularPoint) else tau).tau


@dataclass(frozen=True)
class EichlerTermSpec:
    """Exponents and lower limit of one double Eichler term.

    For a lattice point ``n`` the first term has
    ``c1 = (2 a1 n1 + a2 n2)^2 / (2 a1)``, ``c2 = D n2^2 / (2 a1)`` and the
    second ``c1 = (a2 n1 + 2 a3 n2)^2 / (2 a3)``, ``c2 = D n1^2 / (2 a3)``.
    """

    c1: float
    c2: float
    lower_limit: LowerLimit
    tau: complex

    def __post_init__(self):
        for name in ("c1", "c2"):
            val = float(getattr(self, name))
            if not (math.isfinite(val) and val >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {val}")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "tau", _tau(self.tau))

    @property
    def L(self) -> complex:
        return -self.tau.conjugate() if self.lower_limit is LowerLimit.MINUS_CONJ_TAU else 0j

    @property
    def zeta(self) -> complex:
        return -1j * (self.L + self.tau)


# --- one-dimensional ----------------------------------------------------------

def mordell_h(z: complex, tau, tol: Optional[Tolerance] = None) -> QuadratureResult:
    """``h(z; tau) = int_R cosh(2 pi z w) / cosh(pi w) exp(pi i tau w^2) dw``.

    The integrand is bounded by ``2 exp(-pi v w^2 + pi (2 |Re z| - 1) |w|)``
    and the line is truncated where that bound falls below the tolerance.
    """
    t = _tau(tau)
    z = complex(z)
    tol = tol or Tolerance(1e-13, 1e-12)
    v = t.imag
    g = math.pi * (2 * abs(z.real) - 1)
    # solve pi v W^2 - g W = log(4 / (pi v eps)) + margin
    rhs = math.log(4.0 / max(tol.abs_tol, 1e-300)) + 5.0
    W = (g + math.sqrt(g * g + 4 * math.pi * v * rhs)) / (2 * math.pi * v)
    W = max(W, 1.0)

    def f(w):
        # cosh(A)/cosh(B) computed as sum of exponentials normalised by exp(|B|)
        a = 2 * np.pi * z * w
        b = np.pi * np.abs(w)
        num = 0.5 * (np.exp(a - b) + np.exp(-a - b))
        den = 0.5 * (1 + np.exp(-2 * b))
        return num / den * np.exp(1j * np.pi * t * w * w)

    res = integrate_1d(f, -W, W, tol.scaled(0.5), points=(0.0,))
    tail = 4 * math.exp(-(math.pi * v * W * W - g * W)) / (math.pi * v * W)
    err = res.err_est + tail
    return QuadratureResult(res.value, err, res.n_evals, bool(res.converged and err <= tol.target(res.value)))


def _g_it(a: float, b: float, t: np.ndarray) -> np.ndarray:
    # g_{a,b}(i t), using the modular transform for t < 1
    out = np.empty(np.shape(t), dtype=complex)
    for i, tt in enumerate(np.ravel(t)):
        if tt >= 1:
            out.flat[i] = unary_theta(a, b, 1j * tt, tol=1e-17)
        else:
            out.flat[i] = 1j * tt**-1.5 * cmath.exp(2j * math.pi * a * b) * unary_theta(
                b, -a, 1j / tt, tol=1e-17)
    return out


def _termwise_tail(a: float, b: float, T: float, z: complex, tol: float) -> Tuple[complex, int]:
    """``i sum_n n e^{2 pi i b n} int_T^inf e^{-pi n^2 t} / sqrt(t + z) dt`` in closed form."""
    ar = a - math.floor(a + 0.5)  # representative in [-1/2, 1/2)
    # |term| <= exp(-pi n^2 T) / sqrt(Re z); stop once the remaining mass is below tol
    N = 1
    while 2 * (N + 1) * math.exp(-math.pi * (N + 0.5) ** 2 * T) / math.sqrt(z.real) > tol * 1e-2:
        N += 1
        if N > 100000:
            raise ConvergenceFailure("termwise Eichler sum does not converge")
    n = ar + np.arange(-N, N + 1, dtype=float)
    n = n[n != 0]
    arg = np.sqrt(np.pi * n * n * (T + z))
    per = np.exp(-np.pi * n * n * T) * special.wofz(1j * arg) / np.abs(n)
    val = 1j * np.sum(n * np.exp(2j * np.pi * b * n) * per)
    return complex(val), int(n.size)


def eichler_1d(a: float, b: float, tau, tol: Optional[Tolerance] = None,
               method: str = "direct", delta: float = 1e-3) -> QuadratureResult:
    """``int_0^{i inf} g_{a+1/2, b+1/2}(w) / sqrt(-i (w + tau)) dw``.

    ``method="direct"``: quadrature of the theta integrand on ``[0, 1]``
    (modular transform for small ``t``) plus the closed-form termwise
    integral over ``[1, inf)``.

    ``method="termwise"``: closed-form termwise integrals over ``[delta, inf)``;
    the strip ``[0, delta]`` is omitted and its bound is added to ``err_est``.
    """
    t = _tau(tau)
    tol = tol or Tolerance(1e-12, 1e-11)
    a2, b2 = float(a) + 0.5, float(b) + 0.5
    z = -1j * t
    if method == "direct":
        def f(s):
            return 1j * _g_it(a2, b2, s) / np.sqrt(s + z)

        head = integrate_1d(f, 0.0, 1.0, tol.scaled(0.5))
        tail, n_terms = _termwise_tail(a2, b2, 1.0, z, tol.abs_tol)
        err = head.err_est + 1e-2 * tol.abs_tol
        return QuadratureResult(head.value + tail, err, head.n_evals + n_terms,
                                bool(head.converged and err <= tol.target(head.value + tail)))
    if method == "termwise":
        tail, n_terms = _termwise_tail(a2, b2, delta, z, tol.abs_tol)
        err = _strip_bound(a2, b2, delta, z) + 1e-2 * tol.abs_tol
        return QuadratureResult(tail, err, n_terms, bool(err <= tol.target(tail)))
    raise ValueError(f"unknown method {method!r}")


def _strip_bound(a: float, b: float, delta: float, z: complex) -> float:
    # |g_{a,b}(i t)| <= t^{-3/2} sum_{n in b+Z} |n| e^{-pi n^2 / t}, increasing on (0, delta]
    br = abs(b - math.floor(b + 0.5))
    k = np.arange(0, 200, dtype=float)
    ns = np.concatenate([br + k, (1 - br) + k])
    ns = ns[ns > 0]
    g_max = delta**-1.5 * float(np.sum(ns * np.exp(-np.pi * ns * ns / delta)))
    return delta * g_max / math.sqrt(z.real)


def identity_1d(a: float, b: float, tau, tol: Optional[Tolerance] = None) -> Tuple[complex, complex]:
    """Both sides of ``h(a tau - b) = -e^{-2 pi i a (b + 1/2)} q^{a^2/2} int_0^{i inf} ...``."""
    t = _tau(tau)
    lhs = mordell_h(a * t - b, t, tol).value
    pref = -cmath.exp(-2j * math.pi * a * (b + 0.5)) * cmath.exp(1j * math.pi * t * a * a)
    rhs = pref * eichler_1d(a, b, t, tol).value
    return lhs, rhs


# --- double Eichler terms -------------------------------------------------------

def eichler_term(spec: EichlerTermSpec, tol: Optional[Tolerance] = None) -> QuadratureResult:
    """``int_0^inf dt1 e^{pi i c1 w1} / sqrt(t1 + zeta) int_{t1}^inf dt2 e^{pi i c2 w2} / sqrt(t2 + zeta)``.

    Here ``w_j = L + i t_j``.  The inner integral is closed form,
    ``e^{-pi c2 t1} erfcx(sqrt(pi c2 (t1 + zeta))) / sqrt(c2)``; the outer
    one runs on a half-line with decay scale ``1 / (pi (c1 + c2))``.
    ``c2 = 0`` makes the inner integral diverge and raises
    :class:`DomainError`; callers skip terms whose prefactor vanishes
    before getting here.
    """
    tol = tol or Tolerance(1e-13, 1e-11)
    c1, c2 = spec.c1, spec.c2
    if c2 == 0:
        raise DomainError("inner Eichler integral diverges for c2 = 0")
    zeta = spec.zeta
    if not zeta.real > 0:
        raise DomainError("path leaves the half-plane Re(-i(w + tau)) > 0")
    rc2 = math.sqrt(c2)

    def f(t):
        w = np.sqrt(t + zeta)
        inner = np.exp(-np.pi * c2 * t) * special.wofz(1j * np.sqrt(np.pi * c2) * w) / rc2
        return np.exp(-np.pi * c1 * t) / w * inner

    d = 1.0 / (math.pi * (c1 + c2))
    # |f| <= exp(-t/d) / (Re zeta * sqrt(pi) c2) since erfcx(x) <= 1/(sqrt(pi) x)
    bound = 1.0 / (abs(zeta) ** 0.5 * math.sqrt(zeta.real) * math.sqrt(math.pi) * c2) + 1.0 / (
        math.sqrt(zeta.real) * rc2)
    res = integrate_halfline(f, 0.0, d, tol, bound=bound)
    phase = cmath.exp(1j * math.pi * (c1 + c2) * spec.L)
    return QuadratureResult(phase * res.value, res.err_est, res.n_evals, res.converged)


def lattice_term_specs(Q: QuadraticForm, n) -> Tuple[Tuple[float, float, float], Tuple[float, float, float]]:
    """``(P, c1, c2)`` for both terms of the per-lattice-point identity.

    ``P1 = sqrt(D) n2 (2 a1 n1 + a2 n2) / (2 a1)`` and
    ``P2 = sqrt(D) n1 (a2 n1 + 2 a3 n2) / (2 a3)``.
    """
    n1, n2 = (n.n1, n.n2) if isinstance(n, LatticePoint) else (Fraction(n[0]), Fraction(n[1]))
    a1, a2, a3, D = Q.a1, Q.a2, Q.a3, Q.D
    A = 2 * a1 * n1 + a2 * n2
    B = a2 * n1 + 2 * a3 * n2
    rD = math.sqrt(D)
    first = (rD * float(n2 * A / (2 * a1)), float(A * A / (2 * a1)), float(D * n2 * n2 / (2 * a1)))
    second = (rD * float(n1 * B / (2 * a3)), float(B * B / (2 * a3)), float(D * n1 * n1 / (2 * a3)))
    return first, second


def m2_eichler_term(Q: QuadraticForm, n, tau, tol: Optional[Tolerance] = None) -> complex:
    """Per-lattice-point double Eichler representation of ``M2(kappa; sqrt(v) u(n))``.

    Returns ``q^{Q(n)} (P1 R1 + P2 R2)`` with ``R_j`` the parameter-form
    terms from lower limit ``-conj(tau)``; at ``tau = i v`` this equals
    ``M2(kappa; sqrt(v) u(n))`` off the loci.
    """
    t = _tau(tau)
    n = n if isinstance(n, LatticePoint) else LatticePoint(*n)
    total = 0j
    for P, c1, c2 in lattice_term_specs(Q, n):
        if P == 0:
            continue
        total += P * eichler_term(EichlerTermSpec(c1, c2, LowerLimit.MINUS_CONJ_TAU, t), tol).value
    Qn = float(Q.a1 * n.n1**2 + Q.a2 * n.n1 * n.n2 + Q.a3 * n.n2**2)
    return cmath.exp(2j * math.pi * t * Qn) * total


# --- lattice sums ----------------------------------------------------------------

def richardson(S: Sequence[float], r0: int = 1) -> float:
    """Limit of ``S_r = S + c1 h + c2 h^2 + ...`` with ``h = 1/(r + 1/2)``.

    Polynomial extrapolation to ``h = 0`` through all given points
    (``S[0]`` belongs to ``r = r0``), evaluated by Neville's scheme.
    """
    S = np.asarray(S, dtype=complex)
    h = 1.0 / (np.arange(r0, r0 + S.size) + 0.5)
    P = S.copy()
    for k in range(1, S.size):
        P[:-k] = (h[k:] * P[:-k] - h[:-k] * P[1:S.size - k + 1]) / (h[k:] - h[:-k])
    return complex(P[0])


def aitken(S: Sequence[float]) -> complex:
    """Aitken delta-squared estimate from the last three partial sums."""
    if len(S) < 3:
        return complex(S[-1])
    s0, s1, s2 = (complex(x) for x in S[-3:])
    den = s2 - 2 * s1 + s0
    return s2 if den == 0 else s2 - (s2 - s1) ** 2 / den


@dataclass
class LatticeSumReport:
    """Partial sums ``S_1..S_rmax`` of a lattice pipeline and their extrapolation.

    ``value`` is the Richardson limit in ``h = 1/(r + 1/2)``; ``raw`` is
    ``S_rmax`` and ``aitken`` the delta-squared estimate.  ``err_est`` is
    the change of the extrapolated value when the last partial sum is
    dropped.  ``locus_terms`` counts lattice points on a discontinuity
    locus and ``locus_discrepancy`` is the largest difference between the
    Eichler and relation evaluations there (Eichler path only).
    """

    method: str
    partial_sums: List[complex]
    value: complex
    raw: complex
    aitken: complex
    err_est: float
    increments: List[float]
    r_used: int
    n_evals: int
    converged: bool
    locus_terms: int = 0
    locus_discrepancy: float = 0.0
    extra: Dict[str, float] = field(default_factory=dict)


def _lattice_term(Q: QuadraticForm, n: LatticePoint, v: float, path: M2Path,
                  tol: Tolerance) -> Tuple[float, int, float]:
    """``exp(2 pi v Q(n)) M2(kappa; sqrt(v/2) u(n))``, evaluation count, locus discrepancy."""
    signs = lattice_signs(Q, n)
    on_locus = signs[1] == 0 or signs[2] == 0
    s = math.sqrt(v / 2)
    u1, u2 = u_of_n(Q, n)
    x1, x2 = s * u1, s * u2
    if path is M2Path.RELATION or (path is M2Path.CONTOUR and on_locus):
        return m2_relation_scaled(Q.kappa, x1, x2, signs), 0, 0.0
    if path is M2Path.CONTOUR:
        res = m2_contour(Q.kappa, x1, x2, tol, scaled=True)
        return float(res.value.real), res.n_evals, 0.0
    total = 0.0
    n_ev = 0
    for P, c1, c2 in lattice_term_specs(Q, n):
        if P == 0:
            continue
        res = eichler_term(EichlerTermSpec(c1, c2, LowerLimit.ZERO, 1j * v), tol)
        total += P * res.value.real
        n_ev += res.n_evals
    disc = abs(total - m2_relation_scaled(Q.kappa, x1, x2, signs)) if on_locus else 0.0
    return total, n_ev, disc


def h_alpha_lattice(Q: QuadraticForm, alpha: AlphaShift, v: float, r_max: int = 6,
                    tol: Optional[Tolerance] = None, m2_path=M2Path.CONTOUR,
                    check_decrease: bool = True) -> LatticeSumReport:
    """``H_alpha(i v)`` as ``2 lim_r sum_{|n_j - alpha_j| <= r} M2(kappa; sqrt(v/2) u(n)) e^{2 pi v Q(n)}``.

    The partial sums converge like ``1/r`` (the terms only decay like
    ``1/(n1 n2)``), so the reported ``value`` is the Richardson limit of
    ``S_1..S_rmax``.  Terms are accumulated in ring order, then row-major,
    so the result does not depend on evaluation order.

    Raises
    ------
    DomainError
        For ``alpha`` in ``Z^2``, ``v <= 0`` or ``r_max < 1``.
    NonConvergence
        When ``check_decrease`` and the last three increments
        ``|S_r - S_{r-1}|`` are not strictly decreasing.
    """
    m2_path = M2Path(m2_path)
    if alpha.case is AlphaCase.BOTH_INTEGRAL:
        raise DomainError("alpha in Z^2 is not covered by the lattice pipeline")
    if not v > 0:
        raise DomainError("v must be positive")
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    tol = tol or Tolerance(1e-13, 1e-11)
    al = alpha.reduced()
    ring_sums = np.zeros(r_max + 1)
    n_evals = 0
    locus = 0
    disc = 0.0
    for ring, n in ring_order(al, r_max):
        val, ne, d = _lattice_term(Q, n, v, m2_path, tol)
        ring_sums[ring] += val
        n_evals += ne
        sg = lattice_signs(Q, n)
        if sg[1] == 0 or sg[2] == 0:
            locus += 1
            disc = max(disc, d)
    S = list(2 * np.cumsum(ring_sums)[1:])
    incr = [abs(S[i] - S[i - 1]) for i in range(1, len(S))]
    converged = True
    if len(incr) >= 3 and not (incr[-3] > incr[-2] > incr[-1]):
        converged = False
        if check_decrease:
            raise NonConvergence(f"lattice increments not decreasing: {incr[-3:]}")
    value = richardson(S)
    err = abs(value - richardson(S[:-1])) if len(S) > 1 else float("inf")
    return LatticeSumReport(
        method=f"lattice-{m2_path.value}",
        partial_sums=[complex(x) for x in S],
        value=value,
        raw=complex(S[-1]),
        aitken=aitken(S),
        err_est=float(err),
        increments=incr,
        r_used=r_max,
        n_evals=n_evals,
        converged=converged,
        locus_terms=locus,
        locus_discrepancy=disc,
    )


def double_eichler_E_alpha(Q: QuadraticForm, alpha: AlphaShift, tau, tol: Optional[Tolerance] = None,
                           r_max: int = 6, full: bool = False):
    """Double Eichler integral ``E_alpha(tau)`` summed lattice term by lattice term.

    ``E_alpha = 1/2 sum_n [P1 R1(n) + P2 R2(n)]`` with ``R_j`` the parameter
    form of the terms from lower limit ``-conj(tau)``.  Terms decay like
    ``exp(-2 pi v Q(n))``, so the box sum converges geometrically; the
    last ring's contribution is the error estimate.

    Raises :class:`NonConvergence` when that contribution exceeds the
    tolerance.  With ``full=True`` the per-ring partial sums are returned
    as well.
    """
    t = _tau(tau)
    tol = tol or Tolerance(1e-13, 1e-11)
    al = alpha.reduced()
    ring_sums = np.zeros(r_max + 1, dtype=complex)
    for ring, n in ring_order(al, r_max):
        for P, c1, c2 in lattice_term_specs(Q, n):
            if P == 0:
                continue
            ring_sums[ring] += 0.5 * P * eichler_term(
                EichlerTermSpec(c1, c2, LowerLimit.MINUS_CONJ_TAU, t), tol).value
    S = np.cumsum(ring_sums)
    last = abs(ring_sums[-1])
    if last > max(tol.target(S[-1]), 1e-10):
        raise NonConvergence(f"outer ring still contributes {last:.3e}")
    value = complex(S[-1])
    return (value, [complex(x) for x in S]) if full else value
