"""Exception types shared across the package."""


class MordellError(Exception):
    """Base class for all errors raised by :mod:`mordell`."""


class DomainError(MordellError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NonFinite(MordellError, ArithmeticError):
    """An integrand returned ``nan`` or ``inf`` at a quadrature node."""


class ConvergenceFailure(MordellError, RuntimeError):
    """A numerical procedure could not reach the requested accuracy."""


class NonConvergence(ConvergenceFailure):
    """A lattice/series truncation does not show the expected decay."""
