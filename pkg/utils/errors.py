# Error types raised across the verifier
#
# Everything derives from ValueError so callers that only know about bad
# input (the CLI, the interactive demos) can keep catching ValueError.


class CanonError(ValueError):
    """Base class for every failure raised by the verifier."""


# -----------------------
# Construction errors (CLI exit code 2)
# -----------------------

class ConstructionError(CanonError):
    """A slope or a triangulation could not be built."""


class ZeroSlopePair(ConstructionError):
    pass


class SlopeTooShort(ConstructionError):
    pass


class ParityError(ConstructionError):
    pass


class CoreSlopeExcluded(ConstructionError):
    pass


class ExcludedSlope(ConstructionError):
    pass


class GluingMismatch(ConstructionError):
    pass


class InvalidTriangulation(ConstructionError):
    pass


class MissingMetadata(ConstructionError):
    pass


# -----------------------
# Solver errors (CLI exit code 3)
# -----------------------

class SolverError(CanonError):
    """The hyperbolic structure could not be found."""


class NoConvergence(SolverError):
    pass


class DegenerateShape(SolverError):
    pass


class NoAngleStructure(SolverError):
    pass


# -----------------------
# Cusp and convexity errors
# -----------------------

class HexagonExtractionFailed(CanonError):
    pass


class AsymmetricHexagon(CanonError):
    pass


class DegenerateHexagon(CanonError):
    pass


class SingularSystem(CanonError):
    pass


class NoCrossing(CanonError):
    pass


class InconsistentOracles(CanonError):
    pass


"""
    Summary:
    Exception hierarchy shared by every module of the verifier.
    Key features:
    - One root (CanonError) that is still a ValueError.
    - ConstructionError and SolverError group the failures the CLI maps to exit codes 2 and 3.
    Dependencies:
    - none
"""
