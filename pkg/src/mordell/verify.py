"""Verification suites: identity checks with explicit tolerances.

Each check compares two independently computed quantities and records
``(name, lhs, rhs, abs_diff, tolerance, passed)``.  The suites are

``errfns``
    one-dimensional relation between ``M`` and ``E``, the ``M2`` relation
    at random off-locus points, separability of ``E2`` at ``kappa = 0``;
``onedim``
    the Mordell/Eichler identity for ``h(a tau - b)``;
``theorem``
    the per-lattice-point double Eichler identity, the lattice/kernel
    triangle for generic and integral shifts, shift invariance, vanishing
    imaginary parts and continuity in ``alpha1``.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .eichler import M2Path, h_alpha_lattice, identity_1d, m2_eichler_term
from .errfns import err_E, err_E2, err_M2, err_M2_contour, err_M_contour
from .forms import AlphaShift, LatticePoint, QuadraticForm, lattice_signs, u_of_n
from .kernel import h_alpha_kernel
from .quad import QuadratureResult

__all__ = ["Check", "VerifyReport", "SUITES", "run_suite", "CRITERIA"]

SCHEMA_VERSION = 1
F = Fraction


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    abs_diff: float
    tolerance: float
    passed: bool


def _check(name: str, lhs, rhs, tol: float) -> Check:
    lhs_c, rhs_c = complex(lhs), complex(rhs)
    diff = abs(lhs_c - rhs_c)
    # report real parts; every compared quantity here is real up to noise
    return Check(name, float(lhs_c.real), float(rhs_c.real), float(diff), float(tol), bool(diff < tol))


@dataclass
class VerifyReport:
    suite: str
    checks: List[Check] = field(default_factory=list)
    passed: bool = True
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "passed": self.passed,
            "wall_time": round(self.wall_time, 3),
            "checks": [asdict(c) for c in self.checks],
        }


# --- parameter sets ---------------------------------------------------------------

TRIANGLE = [
    ((1, 1, 1), (F(1, 3), F(1, 3)), 1.0),
    ((1, 0, 1), (F(1, 2), F(1, 2)), 1.0),
    ((2, 1, 3), (F(1, 4), F(2, 3)), 0.5),
]
INTEGRAL = [
    ((2, 1, 3), (F(0), F(1, 2)), 0.5),
    ((1, 1, 1), (F(1, 3), F(0)), 1.0),
]
ONEDIM = [
    (1 / 3, 1 / 2, 1j),
    (1 / 4, 1 / 4, 2j),
    (0.0, 0.0, 1j),
    (1 / 2, 0.0, 0.5j),
    (2 / 5, 1 / 3, 1j),
]
# (form, n, v) off-locus lattice points for the per-term identity
PER_TERM = [
    ((1, 1, 1), (F(1, 3), F(1, 3)), 1.0),
    ((1, 1, 1), (F(-2, 3), F(1, 3)), 0.5),
    ((1, 1, 1), (F(1, 3), F(-5, 3)), 1.0),
    ((1, 1, 1), (F(4, 3), F(1, 3)), 0.5),
    ((1, 0, 1), (F(1, 2), F(1, 2)), 1.0),
    ((1, 0, 1), (F(-1, 2), F(3, 2)), 0.5),
    ((1, 0, 1), (F(1, 4), F(-3, 4)), 1.0),
    ((2, 1, 3), (F(1, 2), F(-1, 2)), 0.5),
    ((2, 1, 3), (F(1, 4), F(2, 3)), 0.5),
    ((2, 1, 3), (F(-3, 4), F(-1, 3)), 1.0),
]
CONTINUITY = ((2, 1, 3), F(1, 2), 0.5, (F(1, 8), F(1, 16), F(1, 32)))
R_MAX = 6


@functools.lru_cache(maxsize=None)
def _kernel(form, alpha, v) -> QuadratureResult:
    return h_alpha_kernel(QuadraticForm(*form), AlphaShift(*alpha), v)


@functools.lru_cache(maxsize=None)
def _lattice(form, alpha, v, path: str):
    return h_alpha_lattice(QuadraticForm(*form), AlphaShift(*alpha), v, R_MAX, m2_path=path)


def _fmt(alpha) -> str:
    return ",".join(str(a) for a in alpha)


# --- criteria ----------------------------------------------------------------------

def criterion_1(scale: float = 1.0, seed: int = 0) -> List[Check]:
    out = []
    for u in (0.25, -0.25, 1.0, -1.0, 2.5, -2.5):
        contour = err_M_contour(u).value
        out.append(_check(f"M-relation u={u}", contour, err_E(u) - math.copysign(1.0, u), 1e-10 * scale))
    return out


def criterion_2(scale: float = 1.0, seed: int = 0) -> List[Check]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < 25:
        kappa = float(rng.uniform(-2, 2))
        u1, u2 = (float(x) for x in rng.uniform(-3, 3, 2))
        if abs(u2) < 1e-3 or abs(u1 - kappa * u2) < 1e-3:
            continue
        out.append(_check(f"M2 contour/relation kappa={kappa:.4f} u=({u1:.4f},{u2:.4f})",
                          err_M2_contour(kappa, u1, u2), err_M2(kappa, u1, u2), 1e-6 * scale))
    return out


def criterion_3(scale: float = 1.0, seed: int = 0) -> List[Check]:
    grid = np.linspace(-2.0, 2.0, 5)
    return [
        _check(f"E2 separability u=({u1},{u2})", err_E2(0.0, u1, u2), err_E(u1) * err_E(u2), 1e-8 * scale)
        for u1 in grid for u2 in grid
    ]


def criterion_4(scale: float = 1.0, seed: int = 0) -> List[Check]:
    out = []
    for a, b, tau in ONEDIM:
        lhs, rhs = identity_1d(a, b, tau)
        out.append(_check(f"h(a tau - b) identity a={a:.4g} b={b:.4g} tau={tau}", lhs, rhs, 1e-6 * scale))
    return out


def criterion_5(scale: float = 1.0, seed: int = 0) -> List[Check]:
    out = []
    for form, n, v in PER_TERM:
        Q = QuadraticForm(*form)
        p = LatticePoint(*n)
        u1, u2 = u_of_n(Q, p)
        s = math.sqrt(v)
        lhs = m2_eichler_term(Q, p, 1j * v)
        rhs = err_M2(Q.kappa, s * u1, s * u2, lattice_signs(Q, p))
        out.append(_check(f"per-term Eichler Q={form} n=({_fmt(n)}) v={v}", lhs, rhs, 1e-5 * scale))
    return out


def criterion_6(scale: float = 1.0, seed: int = 0) -> List[Check]:
    out = []
    for form, alpha, v in TRIANGLE:
        tag = f"Q={form} alpha=({_fmt(alpha)}) v={v}"
        vals = {p: _lattice(form, alpha, v, p).value for p in ("contour", "relation", "eichler")}
        out.append(_check(f"lattice vs kernel {tag}", vals["contour"], _kernel(form, alpha, v).value.real,
                          1e-4 * scale))
        out.append(_check(f"contour vs relation {tag}", vals["contour"], vals["relation"], 2e-5 * scale))
        out.append(_check(f"contour vs eichler {tag}", vals["contour"], vals["eichler"], 2e-5 * scale))
        out.append(_check(f"relation vs eichler {tag}", vals["relation"], vals["eichler"], 2e-5 * scale))
    return out


def criterion_7(scale: float = 1.0, seed: int = 0) -> List[Check]:
    return [
        _check(f"integral-alpha lattice(relation) vs kernel Q={form} alpha=({_fmt(alpha)}) v={v}",
               _lattice(form, alpha, v, "relation").value, _kernel(form, alpha, v).value.real, 1e-3 * scale)
        for form, alpha, v in INTEGRAL
    ]


def criterion_8(scale: float = 1.0, seed: int = 0) -> List[Check]:
    out = []
    for form, alpha, v in (TRIANGLE[0], INTEGRAL[0]):
        path = "contour" if alpha[0].denominator != 1 and alpha[1].denominator != 1 else "eichler"
        base = _lattice(form, alpha, v, path).value
        for shift in ((1, 0), (0, 1)):
            moved = (alpha[0] + shift[0], alpha[1] + shift[1])
            val = h_alpha_lattice(QuadraticForm(*form), AlphaShift(*moved), v, R_MAX, m2_path=path).value
            out.append(_check(f"shift invariance Q={form} alpha=({_fmt(alpha)})+{shift}", val, base,
                              1e-10 * scale))
    return out


def criterion_9(scale: float = 1.0, seed: int = 0) -> List[Check]:
    out = []
    for form, alpha, v in TRIANGLE + INTEGRAL:
        res = _kernel(form, alpha, v)
        out.append(_check(f"Im kernel Q={form} alpha=({_fmt(alpha)}) v={v}", abs(res.value.imag), 0.0,
                          10 * res.err_est * scale))
    return out


def criterion_10(scale: float = 1.0, seed: int = 0) -> List[Check]:
    form, a2, v, steps = CONTINUITY
    target = _kernel(form, (F(0), a2), v).value.real
    gaps = [abs(_kernel(form, (a1, a2), v).value.real - target) for a1 in steps]
    # monotone approach: gap at the next step is smaller (abs_diff holds the decrease)
    out = [
        Check(f"alpha1 continuity gap decreases at alpha1={steps[i + 1]}", gaps[i + 1], gaps[i],
              gaps[i] - gaps[i + 1], 0.0, bool(gaps[i + 1] < gaps[i]))
        for i in range(len(steps) - 1)
    ]
    last = steps[-1]
    out.append(_check(f"alpha1 continuity final gap alpha1={last}", _kernel(form, (last, a2), v).value.real,
                      target, 1e-3 * scale))
    return out


CRITERIA: Dict[int, Callable[..., List[Check]]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}
SUITES: Dict[str, Sequence[int]] = {
    "errfns": (1, 2, 3),
    "onedim": (4,),
    "theorem": (5, 6, 7, 8, 9, 10),
    "all": tuple(range(1, 11)),
}


def run_suite(name: str, tol_scale: float = 1.0, seed: int = 0) -> VerifyReport:
    """Run a named suite; the report passes iff every check passes."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    t0 = time.perf_counter()
    report = VerifyReport(name)
    for k in SUITES[name]:
        for c in CRITERIA[k](tol_scale, seed):
            c.name = f"[{k}] {c.name}"
            report.checks.append(c)
    report.passed = all(c.passed for c in report.checks)
    report.wall_time = time.perf_counter() - t0
    return report
