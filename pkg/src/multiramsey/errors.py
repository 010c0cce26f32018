"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RamseyError(Exception):
    """Base class for all errors raised by multiramsey."""


class InvalidArgument(RamseyError, ValueError):
    """An argument has the wrong shape, range or type."""


class InvalidParametrization(InvalidArgument):
    """A parametrization Jacobian is malformed or rank deficient."""


class NotOrthogonal(InvalidArgument):
    """A matrix failed the realness or orthogonality check.

    Attributes:
        check: ``"imaginary"`` or ``"orthogonality"``.
        deviation: the offending max-abs deviation.
    """

    def __init__(self, check: str, deviation: float, tol: float):
        self.check = check
        self.deviation = deviation
        self.tol = tol
        super().__init__(f"{check} check failed: deviation {deviation:.3e} > tol {tol:.1e}")


class ZeroAmplitude(RamseyError):
    """A probe population vanishes where a bound needs it to be positive."""

    def __init__(self, index: int, population: float):
        self.index = index
        self.population = population
        super().__init__(f"mode {index} has population {population:.3e}; bound diverges")


class ZeroResidual(RamseyError):
    """Beam-splitter cascade ran out of residual intensity before the target was met."""


class SingularFisherMatrix(RamseyError):
    """Fisher matrix is not invertible to working precision."""

    def __init__(self, condition: float):
        self.condition = condition
        super().__init__(f"Fisher matrix is singular (condition number {condition:.3e})")


class NonConvergence(RamseyError):
    """An iterative optimizer hit its iteration cap.

    The best point found so far is kept in ``best``.
    """

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


class DegenerateLikelihood(RamseyError):
    """All likelihood weights are zero, so every parameter value is a maximizer."""

    def __init__(self, message: str = "all likelihood weights are zero", run: int | None = None):
        self.run = run
        if run is not None:
            message = f"run {run}: {message}"
        super().__init__(message)


class ConfigError(RamseyError):
    """A command configuration is invalid."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
