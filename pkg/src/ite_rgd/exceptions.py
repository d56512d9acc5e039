"""Exception types raised across the package."""


class ContractViolation(ValueError):
    """An input breaks a documented precondition (Hermiticity, unit norm, ...)."""


class DimensionMismatch(ContractViolation):
    pass


class ConventionError(ContractViolation):
    """A Pauli string with the wrong normalization convention was supplied."""


class SizeLimitExceeded(ValueError):
    """The dense representation would exceed the configured qubit cap."""


class DegenerateStateError(ArithmeticError):
    """Imaginary time evolution annihilated the state (no retained spectral weight)."""
