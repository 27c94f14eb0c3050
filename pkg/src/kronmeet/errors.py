"""Exception types shared across the package."""


class KronmeetError(Exception):
    """Base class for all kronmeet errors."""


class InvalidSizeError(KronmeetError, ValueError):
    """Graph generator called with a size below the family minimum."""


class ParseError(KronmeetError, ValueError):
    """Malformed graph or chain document."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(KronmeetError, ValueError):
    """Matrix violates stochasticity, nonnegativity, or support constraints."""


class NonUniqueStationaryError(KronmeetError, ValueError):
    """Chain has several absorbing classes, so no unique stationary vector."""

    def __init__(self, message, classes=()):
        self.classes = tuple(tuple(c) for c in classes)
        super().__init__(message)


class ReducibleChainError(KronmeetError, ValueError):
    """Operation requires an irreducible chain."""


class UnsupportedGraphError(KronmeetError, ValueError):
    """Graph lacks the structure a strategy constructor needs."""


class InfeasibleError(KronmeetError, RuntimeError):
    """No point satisfies the requested constraints.

    ``residual`` carries the smallest constraint violation the solver could
    certify, as evidence that the target is out of reach.
    """

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)
