"""Exception hierarchy.

Validation problems derive from ``ValueError`` and numeric failures from
``ArithmeticError``; the CLI maps them to exit codes 2 and 3.
"""


class DomainError(ValueError):
    """An input lies outside the domain where a formula is defined."""


class ContractViolation(ValueError):
    """An input breaks a structural precondition (e.g. unsorted timestamps)."""


class InsufficientDataError(ValueError):
    pass


class UndefinedReferenceError(ValueError):
    """A reference (no-sample) quantity needed as a denominator is zero."""


class UndefinedNormalizationError(ValueError):
    pass


class InconsistentCountsError(ValueError):
    pass


class OutOfRangeError(ValueError):
    def __init__(self, message, attainable=None):
        super().__init__(message)
        self.attainable = attainable


class NumericError(ArithmeticError):
    pass


class NoPhaseMatchError(NumericError):
    """No sign change of the phase-mismatch in the searched angle bracket."""


class IllConditionedError(NumericError):
    pass
