"""Exception hierarchy shared across the package."""


class ChpfemError(Exception):
    """Base class for every error raised by chpfem."""


class ParameterError(ChpfemError, ValueError):
    """An argument is outside its admissible range."""


class DomainError(ChpfemError, ValueError):
    """A field value left the admissible set of an energy model.

    ``element`` holds the index of the first offending element when the
    violation was detected during assembly, otherwise ``None``.
    """

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class MeshParseError(ChpfemError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GeometryError(ChpfemError, ValueError):
    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class NumericError(ChpfemError, RuntimeError):
    """An iterative method broke down or did not converge.

    ``iterations`` and ``best`` carry the iteration count and the best iterate
    seen so far, when available.
    """

    def __init__(self, message, iterations=None, best=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.best = best
        self.residual = residual


class NonConvergenceError(NumericError):
    pass


class FitError(ChpfemError, ValueError):
    pass


class ShapeError(ChpfemError, ValueError):
    """A field does not have the shape a diagnostic expects (e.g. sign changes)."""
