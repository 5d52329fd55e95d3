"""Parameter space: binary quadratic forms, rational shifts, lattice points."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

import numpy as np

from .errors import DomainError

Rational = Union[int, Fraction, str]


@dataclass(frozen=True)
class QuadraticForm:
    """Positive definite integral form ``a1 x1^2 + a2 x1 x2 + a3 x2^2``."""

    a1: int
    a2: int
    a3: int

    def __post_init__(self):
        for name in ("a1", "a2", "a3"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val:
                raise DomainError(f"{name} must be an integer, got {val!r}")
            object.__setattr__(self, name, int(val))
        if self.a1 <= 0 or self.a3 <= 0 or self.D <= 0:
            raise DomainError(f"form not positive definite: ({self.a1},{self.a2},{self.a3})")

    @property
    def D(self) -> int:
        return 4 * self.a1 * self.a3 - self.a2 * self.a2

    @property
    def kappa(self) -> float:
        return self.a2 / math.sqrt(self.D)

    @property
    def m(self) -> float:
        return math.sqrt(4 * self.a3 - self.a2 * self.a2 / self.a1)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a1, self.a2 / 2], [self.a2 / 2, self.a3]], dtype=float)

    def __call__(self, x1, x2):
        return self.a1 * x1 * x1 + self.a2 * x1 * x2 + self.a3 * x2 * x2

    @classmethod
    def parse(cls, text: str) -> "QuadraticForm":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise DomainError(f"expected 'a1,a2,a3', got {text!r}")
        try:
            coeffs = [int(p) for p in parts]
        except ValueError as exc:
            raise DomainError(f"form coefficients must be integers: {text!r}") from exc
        return cls(*coeffs)

    def __str__(self):
        return f"{self.a1},{self.a2},{self.a3}"


class AlphaCase(enum.Enum):
    GENERIC = "generic"
    ALPHA1_INTEGRAL = "alpha1-integral"
    ALPHA2_INTEGRAL = "alpha2-integral"
    BOTH_INTEGRAL = "both-integral"


def _to_fraction(x: Rational) -> Fraction:
    if isinstance(x, float):
        raise DomainError("shift components must be exact rationals, not floats")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational number: {x!r}") from exc


@dataclass(frozen=True)
class AlphaShift:
    """Rational shift ``alpha`` of the lattice ``alpha + Z^2``.

    Components are stored as :class:`fractions.Fraction`, so the
    integrality case split is exact.
    """

    alpha1: Fraction
    alpha2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha1", _to_fraction(self.alpha1))
        object.__setattr__(self, "alpha2", _to_fraction(self.alpha2))

    @property
    def case(self) -> AlphaCase:
        i1 = self.alpha1.denominator == 1
        i2 = self.alpha2.denominator == 1
        if i1 and i2:
            return AlphaCase.BOTH_INTEGRAL
        if i1:
            return AlphaCase.ALPHA1_INTEGRAL
        if i2:
            return AlphaCase.ALPHA2_INTEGRAL
        return AlphaCase.GENERIC

    def reduced(self) -> "AlphaShift":
        """Representative with both components in ``(-1/2, 1/2]``."""
        def red(x):
            y = x - math.floor(x)
            return y - 1 if y > Fraction(1, 2) else y
        return AlphaShift(red(self.alpha1), red(self.alpha2))

    def __add__(self, other):
        o1, o2 = other
        return AlphaShift(self.alpha1 + _to_fraction(o1), self.alpha2 + _to_fraction(o2))

    def as_floats(self) -> Tuple[float, float]:
        return float(self.alpha1), float(self.alpha2)

    @classmethod
    def parse(cls, text: str) -> "AlphaShift":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise DomainError(f"expected 'p/q,r/s', got {text!r}")
        for p in parts:
            if "." in p or "e" in p.lower():
                raise DomainError(f"shift components must be written as p/q, got {p!r}")
        return cls(*parts)

    def __str__(self):
        return f"{self.alpha1},{self.alpha2}"


@dataclass(frozen=True)
class ModularPoint:
    """A point ``tau`` of the upper half-plane."""

    tau: complex

    def __post_init__(self):
        t = complex(self.tau)
        if not t.imag > 0:
            raise DomainError(f"tau must lie in the upper half-plane, got {t}")
        object.__setattr__(self, "tau", t)

    @classmethod
    def imaginary(cls, v: float) -> "ModularPoint":
        return cls(complex(0.0, v))

    @property
    def v(self) -> float:
        return self.tau.imag

    @property
    def is_pure_imaginary(self) -> bool:
        return self.tau.real == 0.0


@dataclass(frozen=True)
class LatticePoint:
    n1: Fraction
    n2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "n1", _to_fraction(self.n1))
        object.__setattr__(self, "n2", _to_fraction(self.n2))

    def in_lattice(self, alpha: AlphaShift) -> bool:
        return (self.n1 - alpha.alpha1).denominator == 1 and (self.n2 - alpha.alpha2).denominator == 1


def eval_Q(Q: QuadraticForm, x) -> float:
    x1, x2 = x
    return Q.a1 * x1 * x1 + Q.a2 * x1 * x2 + Q.a3 * x2 * x2


def u_of_n(Q: QuadraticForm, n) -> Tuple[float, float]:
    """The vector ``(2 sqrt(a1) n1 + a2 n2 / sqrt(a1), m n2)``.

    Satisfies ``|u|^2 = 4 Q(n)`` and ``u1 - kappa u2 = 2 sqrt(a1) n1``.
    """
    n1, n2 = (float(c) for c in (n if not isinstance(n, LatticePoint) else (n.n1, n.n2)))
    r = math.sqrt(Q.a1)
    return 2 * r * n1 + Q.a2 / r * n2, Q.m * n2


def lattice_signs(Q: QuadraticForm, n: LatticePoint) -> Tuple[int, int, int, int]:
    """Exact signs of ``u1, u2, u1 - kappa u2, u2 + kappa u1`` at ``u = u(n)``.

    Computed from the rationals, so points on the discontinuity loci are
    recognised without any floating point threshold.
    """
    def sgn(x):
        return (x > 0) - (x < 0)
    n1, n2 = n.n1, n.n2
    return (
        sgn(2 * Q.a1 * n1 + Q.a2 * n2),
        sgn(n2),
        sgn(n1),
        sgn(Q.a2 * n1 + 2 * Q.a3 * n2),
    )


def lattice_box(alpha: AlphaShift, r: int) -> List[LatticePoint]:
    """All ``n`` in ``alpha + Z^2`` with ``|n_j - alpha_j| <= r``, row-major by offset."""
    if r < 1:
        raise DomainError("box radius must be at least 1")
    return [
        LatticePoint(alpha.alpha1 + k1, alpha.alpha2 + k2)
        for k1 in range(-r, r + 1)
        for k2 in range(-r, r + 1)
    ]


def ring_order(alpha: AlphaShift, r: int) -> List[Tuple[int, LatticePoint]]:
    """Box points tagged with their ring ``max(|k1|, |k2|)``, sorted by ring then row-major."""
    pts = []
    for k1 in range(-r, r + 1):
        for k2 in range(-r, r + 1):
            pts.append((max(abs(k1), abs(k2)), LatticePoint(alpha.alpha1 + k1, alpha.alpha2 + k2)))
    pts.sort(key=lambda item: item[0])
    return pts
