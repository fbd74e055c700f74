"""Exception hierarchy for the package."""


class WeylwalkError(Exception):
    """Base class for all package-specific errors."""


class FormatError(WeylwalkError):
    """Malformed input data (non-square matrix, bad rational string, ...)."""


class NotFiniteTypeError(WeylwalkError):
    """Cartan matrix fails the finite-type criterion."""


class IntegralityError(WeylwalkError):
    """A quantity required to lie in a lattice does not."""


class DomainError(WeylwalkError):
    """Parameter outside its admissible region (e.g. tau not in the unit cube)."""


class ExactEvaluationError(WeylwalkError):
    """Fractional exponent evaluation requested without the needed roots."""


class ResourceBudgetError(WeylwalkError):
    """Enumeration exceeded its node budget; carries the partial count."""

    def __init__(self, message: str, partial_count: int = 0):
        super().__init__(message)
        self.partial_count = partial_count


class ClosureError(WeylwalkError):
    """A state set is not closed under one transition step."""

    def __init__(self, message: str, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class HarmonicityError(WeylwalkError):
    """Candidate harmonic function fails the balance equation."""

    def __init__(self, message: str, worst_state=None, defect=None):
        super().__init__(message)
        self.worst_state = worst_state
        self.defect = defect
