"""Adaptive quadrature used by every other module.

The workhorse is a globally adaptive 7/15-point Gauss-Kronrod rule that
evaluates whole batches of panels with one vectorised call.  Each finite
sub-interval is first mapped through the cubic smoothstep
``x = a + (b - a)(3s^2 - 2s^3)``, which turns endpoint singularities of
type ``|x - a|^{-1/2}`` into bounded, smooth integrands and concentrates
nodes near breakpoints.

Infinite ranges are never mapped blindly: callers supply a decay scale
``d`` with ``|f(x)| <= C exp(-(x - a)/d)`` and the range is truncated where
the analytic tail ``C d exp(-(T - a)/d)`` drops below the target; the
tail bound is added to the reported error.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceFailure, DomainError, NonFinite

__all__ = [
    "Tolerance",
    "QuadratureResult",
    "integrate_1d",
    "integrate_halfline",
    "integrate_plane_gaussian",
    "integrate_wedge",
]

DEFAULT_MAX_EVALS = 10**7

# Kronrod 15-point abscissae (positive half, descending) and weights; the
# Gauss 7-point rule uses the odd-indexed abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:7], _XGK[7:], _XGK[6::-1]])
_WK = np.concatenate([_WGK[:7], _WGK[7:], _WGK[6::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[[9, 11, 13]] = _WG[2::-1]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class Tolerance:
    """Accuracy request for a quadrature.

    ``converged`` in the result means ``err_est <= max(abs_tol,
    rel_tol * |value|)``.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_evals: int = DEFAULT_MAX_EVALS

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise DomainError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise DomainError("at least one of abs_tol, rel_tol must be positive")
        if self.max_evals < 100:
            raise DomainError("max_evals must be at least 100")

    @classmethod
    def from_env(cls, abs_tol: float = 1e-10, rel_tol: float = 1e-10) -> "Tolerance":
        """Build a tolerance whose evaluation cap comes from ``MORDELL_MAX_EVALS``."""
        cap = int(os.environ.get("MORDELL_MAX_EVALS", DEFAULT_MAX_EVALS))
        return cls(abs_tol, rel_tol, cap)

    def target(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))

    def scaled(self, factor: float) -> "Tolerance":
        return Tolerance(self.abs_tol * factor, self.rel_tol * factor, self.max_evals)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    err_est: float
    n_evals: int
    converged: bool

    @property
    def real(self) -> float:
        return float(np.real(self.value))


def _check_finite(y):
    if not np.all(np.isfinite(y)):
        raise NonFinite("integrand returned a non-finite value")


def _gk_panels(g, lo, hi):
    """Apply the 15-point pair on panels ``[lo_i, hi_i]`` of the s-variable."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    s = c[:, None] + h[:, None] * _NODES[None, :]
    y = np.asarray(g(s.ravel())).reshape(s.shape)
    _check_finite(y)
    k = h * (y @ _WK)
    gauss = h * (y @ _WG15)
    mean = k / np.where(h == 0, 1.0, 2 * h)
    resabs = np.abs(h) * (np.abs(y) @ _WK)
    resasc = np.abs(h) * (np.abs(y - mean[:, None]) @ _WK)
    err = np.abs(k - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(
            (resasc != 0) & (err != 0),
            np.minimum(1.0, (200.0 * err / np.where(resasc == 0, 1, resasc)) ** 1.5),
            1.0,
        )
    err = np.where((resasc != 0) & (err != 0), resasc * scale, err)
    floor = 50 * _EPS * resabs
    err = np.where(resabs > _TINY / (50 * _EPS), np.maximum(floor, err), err)
    return k, err, floor


def _adaptive(g, edges, tol: Tolerance, n_evals0=0):
    """Globally adaptive bisection over the panels delimited by ``edges``."""
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    vals, errs, floors = _gk_panels(g, lo, hi)
    n_evals = n_evals0 + 15 * lo.size
    while True:
        total = vals.sum()
        total_err = errs.sum()
        if total_err <= tol.target(total):
            return complex(total), float(total_err), n_evals, True
        if floors.sum() >= 0.5 * total_err:
            # error estimate is dominated by round-off; bisection cannot help
            return complex(total), float(total_err), n_evals, False
        width = hi - lo
        splittable = width > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi)) + _TINY
        if not splittable.any() or n_evals + 30 > tol.max_evals:
            return complex(total), float(total_err), n_evals, False
        order = np.argsort(-np.where(splittable, errs, -1.0))
        cum = np.cumsum(errs[order])
        excess = total_err - 0.5 * tol.target(total)
        n_split = int(np.searchsorted(cum, 0.5 * max(excess, 0.0))) + 1
        budget = (tol.max_evals - n_evals) // 30
        n_split = max(1, min(n_split, 256, int(splittable.sum()), budget))
        pick = order[:n_split]
        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        nv, ne, nf = _gk_panels(g, new_lo, new_hi)
        n_evals += 15 * new_lo.size
        keep = np.ones(lo.size, dtype=bool)
        keep[pick] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        floors = np.concatenate([floors[keep], nf])


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: Optional[Tolerance] = None,
    points: Sequence[float] = (),
    initial_panels: int = 1,
) -> QuadratureResult:
    """Integrate a vectorised ``f`` over the finite interval ``[a, b]``.

    ``points`` are interior breakpoints (kinks, peaks); every sub-interval
    gets its own smoothstep map, so ``|x - p|^{-1/2}`` behaviour at any
    breakpoint or endpoint is handled.
    """
    tol = tol or Tolerance()
    a = float(a)
    b = float(b)
    if not a < b:
        raise DomainError(f"integrate_1d needs a < b, got [{a}, {b}]")
    cuts = sorted({a, b, *(float(p) for p in points if a < p < b)})
    cuts = np.asarray(cuts)
    widths = np.diff(cuts)
    n_sub = widths.size

    def g(s):
        # s in [0, n_sub): integer part picks the sub-interval, frac is mapped
        idx = np.minimum(np.floor(s).astype(int), n_sub - 1)
        frac = s - idx
        x = cuts[idx] + widths[idx] * frac * frac * (3 - 2 * frac)
        jac = widths[idx] * 6 * frac * (1 - frac)
        y = f(x)
        return np.asarray(y) * jac

    panels = max(1, int(initial_panels))
    edges = np.linspace(0.0, float(n_sub), n_sub * panels + 1)
    value, err, n, ok = _adaptive(g, edges, tol)
    return QuadratureResult(value, err, n, ok)


def _estimate_bound(f, a, d):
    xs = a + d * np.linspace(1.0, 40.0, 79)
    ys = np.abs(np.asarray(f(xs)))
    _check_finite(ys)
    return 2.0 * float(np.max(ys * np.exp((xs - a) / d))) + _TINY


def integrate_halfline(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    decay_scale: float,
    tol: Optional[Tolerance] = None,
    bound: Optional[float] = None,
    points: Sequence[float] = (),
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, inf)`` for ``|f(x)| <= C exp(-(x-a)/decay_scale)``.

    ``bound`` is the constant ``C``; when omitted it is estimated by
    sampling ``|f| exp((x-a)/d)`` on ``[a + d, a + 40 d]`` with a safety
    factor of two.  Raises :class:`ConvergenceFailure` when the tail bound
    cannot be met within a range of ``700 d``.
    """
    tol = tol or Tolerance()
    d = float(decay_scale)
    if not d > 0:
        raise DomainError("decay_scale must be positive")
    C = float(bound) if bound is not None else _estimate_bound(f, a, d)
    scale = C * d  # upper bound on |integral| past a + d

    def cutoff(eps):
        return a + d * max(1.0, math.log(max(C * d / eps, 1.0)))

    eps = 0.1 * (tol.abs_tol if tol.abs_tol > 0 else tol.rel_tol * scale * 1e-3)
    T = cutoff(eps)
    n_evals = 0
    value = 0j
    err = 0.0
    ok = True
    start = a
    for _ in range(8):
        if T - a > 700 * d:
            raise ConvergenceFailure("half-line tail bound cannot be met")
        brk = [p for p in points if start < p < T]
        k = 1.0
        while start + k * d < T:
            brk.append(start + k * d)
            k *= 2.0
        res = integrate_1d(f, start, T, Tolerance(
            max(0.9 * tol.abs_tol, 1e-300), 0.9 * tol.rel_tol, max(100, tol.max_evals - n_evals)),
            points=brk)
        value += res.value
        err += res.err_est
        n_evals += res.n_evals
        ok = ok and res.converged
        tail = C * d * math.exp(-(T - a) / d)
        need = 0.1 * tol.target(value)
        if tail <= need:
            break
        start, T = T, max(cutoff(need), T + d)
    else:
        raise ConvergenceFailure("half-line tail bound cannot be met")
    err = float(err + tail)
    return QuadratureResult(value, err, n_evals, bool(ok and err <= tol.target(value)))


def integrate_plane_gaussian(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    v: float,
    Q,
    tol: Optional[Tolerance] = None,
    fmax: Optional[float] = None,
    outer_points: Sequence[float] = (0.0,),
    inner_points: Optional[Callable[[float], Sequence[float]]] = None,
) -> QuadratureResult:
    """Integrate ``f(w1, w2) * exp(-2 pi v Q(w))`` over the plane.

    The domain is truncated to the ellipse ``2 pi v Q(w) <= L`` where the
    Gaussian mass outside, ``exp(-L) / (v sqrt(D))``, times ``fmax`` (a
    bound on ``|f|``, sampled when not given) is a tenth of the target.
    Integration is iterated: ``w1`` outside, the ellipse chord in ``w2``
    inside.  ``f`` receives a scalar ``w1`` and an array ``w2``.
    """
    tol = tol or Tolerance()
    if not v > 0:
        raise DomainError("v must be positive")
    a1, a2, a3 = Q.a1, Q.a2, Q.a3
    D = Q.D
    mass = 1.0 / (v * math.sqrt(D))
    if fmax is None:
        grid = np.linspace(-3.0, 3.0, 61) / math.sqrt(v)
        vals = [np.abs(np.asarray(f(w1, grid + 1e-7))) for w1 in grid + 1.3e-7]
        fmax = 2.0 * float(np.max(vals)) + 1e-300
    eps = 0.1 * (tol.abs_tol if tol.abs_tol > 0 else tol.rel_tol * fmax * mass * 1e-3)
    L = max(math.log(max(fmax * mass / eps, 1.0)), 1.0) + 1.0
    R2 = L / (2 * math.pi * v)  # Q(w) <= R2 on the truncated ellipse
    X = math.sqrt(R2 * 4 * a3 / D)
    c = a2 / (2 * a3)
    inner_tol = Tolerance(max(0.05 * tol.abs_tol / X, 1e-300), 0.1 * tol.rel_tol, tol.max_evals)
    state = {"n": 0, "err": 0.0, "ok": True}

    def outer(w1s):
        out = np.empty(np.shape(w1s), dtype=complex)
        for i, w1 in enumerate(np.ravel(w1s)):
            rem = R2 - D * w1 * w1 / (4 * a3)
            if rem <= 0:
                out.flat[i] = 0.0
                continue
            half = math.sqrt(rem / a3)
            lo, hi = -c * w1 - half, -c * w1 + half
            pts = list(inner_points(w1)) if inner_points else [0.0]

            def inner(w2, w1=w1):
                q = a1 * w1 * w1 + a2 * w1 * w2 + a3 * w2 * w2
                return np.asarray(f(w1, w2)) * np.exp(-2 * math.pi * v * q)

            res = integrate_1d(inner, lo, hi, inner_tol, points=pts)
            state["n"] += res.n_evals
            state["err"] = max(state["err"], res.err_est)
            state["ok"] = state["ok"] and res.converged
            out.flat[i] = res.value
        return out

    outer_tol = Tolerance(max(0.5 * tol.abs_tol, 1e-300), 0.5 * tol.rel_tol, tol.max_evals)
    res = integrate_1d(outer, -X, X, outer_tol, points=outer_points)
    tail = fmax * mass * math.exp(-L)
    err = res.err_est + 2 * X * state["err"] + tail
    return QuadratureResult(res.value, float(err), res.n_evals + state["n"],
                            bool(res.converged and state["ok"] and err <= tol.target(res.value)))


def integrate_wedge(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    decay: tuple,
    tol: Optional[Tolerance] = None,
    bound: Optional[float] = None,
) -> QuadratureResult:
    """Integrate over the wedge ``0 <= w1 <= w2 < inf`` as ``int_0^inf int_w1^inf``.

    The inner variable is written ``w2 = w1 + t`` with ``t >= 0``;
    ``decay = (d1, d2)`` with ``|f| <= C exp(-w1/d1 - w2/d2)``.
    """
    tol = tol or Tolerance()
    d1, d2 = (float(x) for x in decay)
    if not (d1 > 0 and d2 > 0):
        raise DomainError("decay scales must be positive")
    d_outer = 1.0 / (1.0 / d1 + 1.0 / d2)
    inner_tol = Tolerance(max(0.1 * tol.abs_tol / (40 * d_outer), 1e-300),
                          0.1 * tol.rel_tol, tol.max_evals)
    count = {"n": 0, "ok": True}

    def outer(w1s):
        out = np.empty(np.shape(w1s), dtype=complex)
        for i, w1 in enumerate(np.ravel(w1s)):
            C = None if bound is None else bound * math.exp(-w1 / d1 - w1 / d2)
            if C is not None and C < 1e-300:
                out.flat[i] = 0.0
                continue
            res = integrate_halfline(lambda t, w1=w1: f(w1, w1 + t), 0.0, d2, inner_tol, bound=C)
            count["n"] += res.n_evals
            count["ok"] = count["ok"] and res.converged
            out.flat[i] = res.value
        return out

    C_out = None if bound is None else bound * d2
    res = integrate_halfline(outer, 0.0, d_outer, tol, bound=C_out)
    return QuadratureResult(res.value, res.err_est, res.n_evals + count["n"],
                            res.converged and count["ok"])
