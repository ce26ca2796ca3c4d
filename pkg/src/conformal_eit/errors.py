"""Exception hierarchy shared by the numerical modules."""


class ConformalEITError(Exception):
    """Base class."""


class InvalidArgument(ConformalEITError, ValueError):
    pass


class PreconditionFailure(ConformalEITError):
    pass


class DivergenceError(ConformalEITError):
    """An iteration failed to reach its tolerance; carries the last residual."""

    def __init__(self, message: str, residual: float, iterations: int = 0):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class UnsupportedGeometry(ConformalEITError):
    pass


class SolverFailure(ConformalEITError):
    pass


class NoDiskFound(ConformalEITError):
    """Data is not explained by any disk; ``best`` holds the closest candidate."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class OptimizationFailure(ConformalEITError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []
