"""Exception hierarchy.

Every error raised on invalid input derives from :class:`ValidationError`, which
the CLI maps to exit code 2.
"""


class ValidationError(ValueError):
    """Base class for input and contract violations."""


class ZeroVarianceError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    pass


class DensityVanishesError(ValidationError):
    pass


class MeanMismatchError(ValidationError):
    pass


class BoundaryTermNonzeroError(ValidationError):
    pass


class DomainMismatchError(ValidationError):
    pass


class UnboundedTestFunctionError(ValidationError):
    pass


class SigmaNonpositiveError(ValidationError):
    pass


class SupportTooLargeError(ValidationError):
    pass


class SingletonSupportError(ValidationError):
    pass


class GcdNotOneError(ValidationError):
    pass


class XNotInLatticeError(ValidationError):
    pass


class XOutsideWindowError(ValidationError):
    pass


class TestFunctionNotCellConstantError(ValidationError):
    __test__ = False


class InsufficientPointsError(ValidationError):
    pass
