"""Exception hierarchy shared by all mmsverify modules."""


class MmsError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteInput(MmsError, ValueError):
    pass


class NonPositiveEigenvalue(MmsError, ValueError):
    """A matrix function that needs a positive spectrum got something else."""


class SingularMatrix(MmsError, ValueError):
    pass


class InvalidMaterial(MmsError, ValueError):
    pass


class NonPositiveJacobian(MmsError, ValueError):
    """det F fell to (or below) the inversion threshold.

    ``index`` is the flat index of the first offending material point, and
    ``element`` is filled in by the assembly layer when it knows it.
    """

    def __init__(self, message, index=None, element=None):
        super().__init__(message)
        self.index = index
        self.element = element


class BoundaryNode(MmsError, ValueError):
    pass


class InvalidResolution(MmsError, ValueError):
    pass


class LinearSolveFailure(MmsError, RuntimeError):
    pass


class NewtonDivergence(MmsError, RuntimeError):
    def __init__(self, message, t=None, history=()):
        super().__init__(message)
        self.t = t
        self.history = list(history)


class NonPositiveNorm(MmsError, ValueError):
    pass


class DegenerateTriplet(MmsError, ValueError):
    pass


class ConfigParseError(MmsError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigValidationError(MmsError, ValueError):
    pass
