"""Exception hierarchy shared by all modules."""


class EppError(Exception):
    """Base class for every error raised by the package."""


class ShapeError(EppError, ValueError):
    pass


class ContractViolation(EppError, ValueError):
    pass


class DomainError(EppError, ValueError):
    pass


class PoleError(EppError, ZeroDivisionError):
    pass


class EppNotExistent(EppError):
    """No eigen-phase preserving transformation exists (odd channel count)."""


class DegenerateBError(EppError, ValueError):
    """Re(B) is singular, so the asymptotic frame cannot be inverted."""


class SingularWronskianError(EppError, ArithmeticError):
    pass


class IllConditionedError(EppError, ArithmeticError):
    pass


class AccuracyError(EppError, ArithmeticError):
    """Integrator step-doubling estimate exceeded the requested tolerance."""


class MatchingError(EppError, ArithmeticError):
    pass
