"""Exception types raised by the package."""


class TriodFlowError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TriodFlowError, ValueError):
    """Arguments violate a documented precondition."""


class DegenerateGeometryError(TriodFlowError, ArithmeticError):
    """A finite-difference stencil collapsed (coincident nodes)."""

    def __init__(self, message, node=None, curve=None):
        super().__init__(message)
        self.node = node
        self.curve = curve


class PinchOffError(DegenerateGeometryError):
    """Nodes of an evolving curve collided during the flow."""


class InvalidProbeError(InvalidInputError):
    """A density probe was evaluated at or after its singular time."""


class ConvergenceWarning(UserWarning):
    """An iterative correction stopped before reaching its tolerance."""
