"""Exception types shared across the package."""


class InvariantError(Exception):
    """Base class for all errors raised by this package."""


# arithmetic primitives

class NotSquarefree(InvariantError):
    pass


class NoConvergence(InvariantError):
    pass


class FactorBudgetExceeded(InvariantError):
    pass


# number fields

class ZeroElement(InvariantError):
    pass


class WrongUnitCount(InvariantError):
    pass


class DependentUnits(InvariantError):
    pass


class MissingUnits(InvariantError):
    pass


class DegreeMismatch(InvariantError):
    pass


class NotASubfield(InvariantError):
    pass


# upper half plane / periods

class NotUpperHalfPlane(InvariantError):
    pass


class TauNotReduced(InvariantError):
    pass


class AgmNoConvergence(InvariantError):
    pass


# elliptic curves

class SingularCurve(InvariantError):
    pass


class PointNotOnCurve(InvariantError):
    pass


class DependentPoints(InvariantError):
    pass


# corpus / cli

class ParseError(InvariantError):
    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class DuplicateLabel(InvariantError):
    pass


class DanglingSubfieldRef(InvariantError):
    pass


class UnknownLabel(InvariantError):
    pass
