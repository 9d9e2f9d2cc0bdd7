"""Exception types shared across the package."""


class MTLabError(Exception):
    """Base class for all errors raised by mtlab."""


class InvalidDimension(MTLabError, ValueError):
    pass


class DomainError(MTLabError, ValueError):
    """Argument outside the set where an operation is defined."""


class OutsideDomain(DomainError):
    """Point outside the open unit disc/ball."""


class SingularPoint(MTLabError, ZeroDivisionError):
    pass


class ToleranceNotMet(MTLabError, RuntimeError):
    def __init__(self, message, estimate):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


class PhiOverflow(MTLabError, OverflowError):
    """The exponential argument exceeded the representable range."""

    def __init__(self, exponent, location=None):
        msg = f"exponent argument {exponent:.6g} exceeds overflow threshold"
        if location is not None:
            msg += f" at {location}"
        super().__init__(msg)
        self.exponent = exponent
        self.location = location


class EnergyNotNormalized(MTLabError, ValueError):
    pass


class GridTooCoarse(MTLabError, ValueError):
    pass


class SupportExitsTruncation(MTLabError, ValueError):
    pass


class NonConvergence(MTLabError, RuntimeError):
    def __init__(self, message, samples=None, residual=None):
        super().__init__(message)
        self.samples = samples
        self.residual = residual


class ConditionViolated(MTLabError, ValueError):
    pass


class NotStabilized(MTLabError, RuntimeError):
    def __init__(self, message, values):
        super().__init__(message)
        self.values = values


class ClassViolation(MTLabError, ValueError):
    pass


class CertificationFailed(MTLabError, RuntimeError):
    def __init__(self, clauses):
        super().__init__("certification failed: " + ", ".join(clauses))
        self.clauses = clauses
