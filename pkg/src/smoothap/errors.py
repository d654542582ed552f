"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(RuntimeError):
    """The request would exceed a configured memory or size budget."""


class PoleError(ArithmeticError):
    """An Euler factor vanished, so the product has a pole."""


class NumericError(ArithmeticError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
