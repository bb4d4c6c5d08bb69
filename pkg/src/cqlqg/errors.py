"""Exception types shared across the package."""


class CqlqgError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(CqlqgError, ValueError):
    """Operands have inconsistent dimensions."""


class SingularOperatorError(CqlqgError):
    """A matrix or matrix operator required to be invertible is (numerically) singular."""


class IndefiniteOperatorError(CqlqgError):
    """A gain operator required to be positive definite has a non-positive eigenvalue."""


class NonFiniteStateError(CqlqgError):
    """An integrated state left the finite floating-point range (NaN/Inf)."""


class NonSymmetricRError(CqlqgError, ValueError):
    """A controller Hamiltonian matrix R is not symmetric within tolerance."""


class ScenarioError(CqlqgError, ValueError):
    """A scenario file failed schema validation; the message carries the field path."""
