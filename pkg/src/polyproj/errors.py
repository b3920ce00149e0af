"""Exception hierarchy shared by every polyproj module."""

from __future__ import annotations


class PolyprojError(Exception):
    """Base class for all library errors."""


class InputError(PolyprojError, ValueError):
    """Malformed user input (scenario files, vectors, options)."""


class SchemaError(InputError):
    pass


class ExprError(InputError):
    pass


class NumericError(PolyprojError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class NonFinite(NumericError):
    pass


class DependentInput(NumericError):
    pass


class DependentRows(DependentInput):
    pass


class NotInSpan(NumericError):
    pass


class Inconsistent(NumericError):
    pass


class CycleLimit(NumericError):
    pass


class NotInCone(NumericError):
    pass


class NoRepresentation(NumericError):
    pass


class ZeroSum(NumericError):
    pass


class DependentFreePart(DependentInput):
    pass


class IndependenceViolation(NumericError):
    pass


class DependentAtAnchor(NumericError):
    pass


class Infeasible(PolyprojError):
    """The constraint set is empty at the requested parameter."""


class AnchorInfeasible(Infeasible):
    pass


class NotFeasible(PolyprojError, ValueError):
    """A point that must lie in C(p) violates a constraint."""


class TooManyConstraints(InputError):
    pass


class SubsetBlowup(InputError):
    pass


class InadmissibleL(InputError):
    pass


class AnchorInsideSet(InputError):
    """The anchor point v lies in C(p), so v - P(v, p) = 0."""
