"""Exception hierarchy.

``ModelError`` covers everything that is wrong with the *input* (bad grid,
bad kernel, unparsable config); the CLI maps it to exit code 2.
``InvariantViolation`` is raised when a run breaks a property that the
scheme is supposed to guarantee; the CLI maps it to exit code 3.
"""


class ModelError(ValueError):
    pass


class InvalidGrid(ModelError):
    pass


class ValidationError(ModelError):
    pass


class NonMonotoneVelocity(ValidationError):
    pass


class KernelUnderResolved(ValidationError):
    pass


class GridMismatch(ModelError):
    pass


class IncompatibleFactor(ModelError):
    pass


class InsufficientTrajectoryResolution(ModelError):
    pass


class ParseError(ModelError):
    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class InvariantViolation(RuntimeError):
    pass


class CflViolation(InvariantViolation):
    pass


class MaxPrincipleViolation(InvariantViolation):
    pass
