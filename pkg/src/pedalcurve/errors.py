"""Exception hierarchy.

Every error raised by the library derives from :class:`PedalError`. The CLI
prints the class name verbatim, so names are part of the public interface.
"""


class PedalError(Exception):
    """Base class for all domain errors."""


# expr
class ExprSyntaxError(PedalError):
    def __init__(self, message, position=None, expected=None):
        self.position = position
        self.expected = expected
        detail = message
        if position is not None:
            detail += f" at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class NonNumericExponent(PedalError):
    pass


class NotReducibleToQ(PedalError):
    pass


class DomainError(PedalError):
    pass


class NonIntegerExponent(PedalError):
    pass


# transforms
class InvalidParam(PedalError):
    pass


class NumericOnlyTransform(PedalError):
    pass


class OddFirstDerivative(PedalError):
    pass


class NotShiftable(PedalError):
    pass


# mechanics
class DegenerateAngularTerm(PedalError):
    pass


class SingularityReached(PedalError):
    pass


class StepFailure(PedalError):
    pass


class TangentThroughOrigin(PedalError):
    pass


class NotPolynomializable(PedalError):
    pass


class NonMonotonePhase(PedalError):
    pass


class VerticalTangentInPR(PedalError):
    pass


# curves
class UnknownCurve(PedalError):
    pass


class StartOutsideRegion(PedalError):
    pass


class MultiBranchAmbiguity(PedalError):
    pass


class CuspDetected(PedalError):
    pass


class EmptyPath(PedalError):
    pass


# spirals
class ModulusOutOfRange(PedalError):
    pass


class InvalidFamilyParams(PedalError):
    pass


class NoCurve(PedalError):
    pass


class BackSubstitutionMismatch(PedalError):
    pass


# problems
class ZeroAngularMomentum(PedalError):
    pass


class NoOvalSolution(PedalError):
    pass


class NoRealMu(PedalError):
    pass
