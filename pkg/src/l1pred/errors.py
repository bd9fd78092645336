"""Exception types shared across the package."""


class ModelError(ValueError):
    """Invalid specification of a model or of its companion objects (estimators, loss transforms)."""


class SpecParseError(ModelError):
    """A model/loss/grid spec string could not be parsed."""

    def __init__(self, message: str, token: str | None = None):
        super().__init__(message)
        self.token = token


class PreconditionError(ValueError):
    """An operation was called outside the inputs it is valid for."""


class NoValidDensityError(ValueError):
    """The posterior-median construction does not produce a density."""


class InconsistentDataError(ValueError):
    """The observed sample is impossible under the stated model."""


class ConvergenceError(RuntimeError):
    """A quadrature or search failed its own convergence test."""
