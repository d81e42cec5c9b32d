"""Exception types shared across the toolkit."""
from __future__ import annotations

from .numerics import CyclingGuardExceeded, DimensionMismatch


class IdkitError(Exception):
    pass


class PointNotInSet(IdkitError, ValueError):
    pass


class PointNotInDomain(IdkitError, ValueError):
    pass


class EmptyPolyhedron(IdkitError, ValueError):
    pass


class Unbounded(IdkitError, ValueError):
    pass


class FaceBudgetExceeded(IdkitError, RuntimeError):
    pass


class EliminationBudgetExceeded(IdkitError, RuntimeError):
    pass


class PairNotInGraph(IdkitError, ValueError):
    pass


class NotConvex(IdkitError, ValueError):
    pass


class QualificationFailure(IdkitError, ValueError):
    pass


class NotASubgradient(IdkitError, ValueError):
    pass


class NotANormal(IdkitError, ValueError):
    pass


class EmptyMultiplierSet(IdkitError, ValueError):
    pass


class InvalidSplit(IdkitError, ValueError):
    pass


class UnsupportedDescriptor(IdkitError, TypeError):
    pass


class EquivalenceViolation(IdkitError, AssertionError):
    pass


class NotCritical(IdkitError, ValueError):
    pass


class InvalidGrowthFunction(IdkitError, ValueError):
    pass


class InvalidManifold(IdkitError, ValueError):
    pass


class StrictComplementarityRequired(IdkitError, ValueError):
    pass


class ParseError(IdkitError, ValueError):
    pass


__all__ = [name for name in dir() if name[0].isupper()] + [
    "CyclingGuardExceeded", "DimensionMismatch"]
