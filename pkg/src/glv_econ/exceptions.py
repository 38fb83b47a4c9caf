"""Exception hierarchy for the package."""


class GLVEconError(Exception):
    """Base class for all package errors."""


class ConfigError(GLVEconError, ValueError):
    """Invalid parameters or configuration."""


class ZeroWealth(GLVEconError, ValueError):
    pass


class NonFiniteWealth(GLVEconError, ArithmeticError):
    """A step produced NaN or Inf wealth.

    ``iteration`` carries the offending iteration index when known.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class AllZero(GLVEconError, ValueError):
    pass


class TooFewAgents(GLVEconError, ValueError):
    pass


class DegenerateTail(GLVEconError, ValueError):
    pass


class EmptyInput(GLVEconError, ValueError):
    pass


class InsufficientGrid(GLVEconError, ValueError):
    pass


class DimensionMismatch(GLVEconError, ValueError):
    pass


class Divergence(GLVEconError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NonConvergence(GLVEconError, RuntimeError):
    """Optimizer hit its evaluation budget; ``best`` holds the best-so-far result."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
