"""Exception hierarchy shared by every module."""

from __future__ import annotations


class PredToposError(Exception):
    """Base class; ``witness`` carries whatever concrete data exposed the failure."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


# core
class CategoryError(PredToposError):
    pass


class MissingIdentity(CategoryError):
    pass


class NonAssociative(CategoryError):
    pass


class BadComposite(CategoryError):
    pass


class UnknownObject(PredToposError):
    pass


class PresheafLawError(PredToposError):
    pass


class BaseMismatch(PredToposError):
    pass


class FunctorError(PredToposError):
    pass


# finset / ambients
class ShapeMismatch(PredToposError):
    pass


class NotEquivalenceRelation(PredToposError):
    pass


class NotContinuous(PredToposError):
    pass


class TopologyError(PredToposError):
    pass


# logic
class FormulaSyntaxError(PredToposError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}", witness=pos)
        self.pos = pos


class SortError(PredToposError):
    def __init__(self, message: str, var: str | None = None):
        super().__init__(message, witness=var)
        self.var = var


# amc
class NotCommuting(PredToposError):
    pass


class NotInClass(PredToposError):
    pass


class NotARepresentation(PredToposError):
    pass


class SquareNotStrongCollection(PredToposError):
    pass


class NotSurjective(PredToposError):
    pass


# wtypes
class SignatureMismatch(PredToposError):
    pass


# completion
class AmbientMismatch(PredToposError):
    pass


class HypothesisFailed(PredToposError):
    pass


# sites
class SiteAxiomCViolated(PredToposError):
    pass


class TopologyMismatch(PredToposError):
    pass


# cli
class ParseError(PredToposError):
    def __init__(self, message: str, file: str = "<input>", line: int = 0):
        super().__init__(f"{file}:{line}: {message}", witness=(file, line))
        self.file = file
        self.line = line


class UnknownName(PredToposError):
    pass


class DuplicateName(PredToposError):
    pass
