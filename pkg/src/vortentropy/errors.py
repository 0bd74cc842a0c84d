"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerances.

    Attributes
    ----------
    residual : float
        Last Euler-Lagrange residual seen by the solver.
    iterations : int
        Number of sweeps performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
