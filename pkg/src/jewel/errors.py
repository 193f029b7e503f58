"""Exception hierarchy shared by all modules."""


class JewelError(Exception):
    """Base class for library errors."""


class ValidationError(JewelError, ValueError):
    """Input data violates a structural precondition (shape, positivity, ...)."""


class NumericalError(JewelError, ArithmeticError):
    """A numerical routine broke down (non-convergence, singular system)."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution
