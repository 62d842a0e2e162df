"""Exception hierarchy.

Domain errors (bad input, collisions) map to CLI exit code 1, numerical
failures (non-convergence, quadrature) to exit code 2.
"""


class VortexError(Exception):
    """Base class for all package errors."""


class DomainError(VortexError, ValueError):
    """Input outside the admissible phase space or parameter range."""


class CollisionError(DomainError):
    """Two vortices closer than the collision guard."""


class DimensionMismatch(DomainError):
    pass


class ZeroVector(DomainError):
    pass


class GridMismatch(DomainError):
    """Loop sample count not divisible by the particle count."""


class DegenerateInput(DomainError):
    pass


class DegenerateGap(DomainError):
    pass


class OddN(DomainError):
    pass


class NotApplicable(DomainError):
    pass


class InvalidConfig(DomainError):
    pass


class LevelEmpty(DomainError):
    """Requested energy level lies beyond the restricted extremum."""


class NumericalError(VortexError, RuntimeError):
    """Base class for numerical failures."""


class CollisionApproach(NumericalError):
    """Integration came within the collision guard."""


class StepFailure(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass
