"""Exception and warning types shared across the package."""


class RiemannKdVError(Exception):
    """Base class for all library errors."""


class NumericalToleranceError(RiemannKdVError):
    """A computation finished but could not meet its requested tolerance."""


class ValidationError(RiemannKdVError, ValueError):
    """Invalid user input."""


# elliptic
class Pole(RiemannKdVError, ZeroDivisionError):
    """Evaluation requested at a lattice point."""


class TruncationFailure(NumericalToleranceError):
    """Lattice-sum tail bound exceeds the requested tolerance."""


class PrecisionWarning(UserWarning):
    """Result is valid but near a singularity where relative precision degrades."""


# cylinder_field
class ContourHitsDivisor(RiemannKdVError):
    pass


class QuadratureNotConverged(NumericalToleranceError):
    pass


class PathHitsDivisor(RiemannKdVError):
    pass


class BranchPointOnGrid(RiemannKdVError):
    pass


# riemann_family
class BracketNotFound(NumericalToleranceError):
    pass


class ClipTooSmall(ValidationError):
    pass


# shiffman
class AtEnd(RiemannKdVError):
    """Quantity undefined at a zero or pole of the Gauss map."""


class GridTooCoarse(NumericalToleranceError):
    pass


class DivisorBoundViolated(NumericalToleranceError):
    pass


# diffpoly
class NotExact(RiemannKdVError):
    """Differential polynomial is not a total derivative."""


# kdv_flow
class CFLViolation(NumericalToleranceError):
    pass


class SpectralBlocking(NumericalToleranceError):
    pass


class RadiusExceeded(NumericalToleranceError):
    pass


class PoleOnContour(RiemannKdVError):
    pass


class PoleCountMismatch(NumericalToleranceError):
    pass


class ResidueNonzero(NumericalToleranceError):
    pass


class Degenerate(RiemannKdVError):
    pass


class StepRejected(NumericalToleranceError):
    pass


# jacobi_spectral
class GapNotResolved(NumericalToleranceError):
    pass


class ResonantDelta(ValidationError):
    pass
