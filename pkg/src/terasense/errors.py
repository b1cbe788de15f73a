"""Exception hierarchy. Everything raised on bad input derives from ``TerasenseError``."""


class TerasenseError(Exception):
    """Base class for domain failures (CLI exit code 1)."""


class DomainError(TerasenseError, ValueError):
    """An argument lies outside the operation's valid domain."""


class FormatError(TerasenseError, ValueError):
    """Malformed input file or record."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class SingularMeasurementError(DomainError):
    """Inversion denominator vanishes (e.g. total reflection with zero phase)."""


class InconsistentMeasurementError(DomainError):
    """Measured values imply an unphysical material (e.g. n <= 0)."""


class DegenerateDataError(DomainError):
    """Constant spectrum, zero-variance matrix or similar degenerate input."""


class NonNegativityError(DomainError):
    """Negative entries passed to a non-negative factorization."""


class DivergenceError(TerasenseError, ArithmeticError):
    """Training produced non-finite values."""

    def __init__(self, message, epoch=None):
        self.epoch = epoch
        super().__init__(message if epoch is None else f"{message} (epoch {epoch})")


class AllocationError(TerasenseError):
    """A carrier plan could not be resolved."""
