"""Exception hierarchy shared by the package."""


class OpinionEnvError(Exception):
    """Base class for all package errors."""


class ConfigError(OpinionEnvError, ValueError):
    """Invalid model or run configuration."""


# graph construction / usage
class GraphError(OpinionEnvError, ValueError):
    pass


class IndexOutOfRange(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class IsolatedVertex(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class LengthMismatch(GraphError):
    pass


class SizeMismatch(OpinionEnvError, ValueError):
    pass


# integration
class SolverFailure(OpinionEnvError, RuntimeError):
    pass


class StepUnderflow(SolverFailure):
    pass


class MaxStepsExceeded(SolverFailure):
    pass


class NonFiniteState(SolverFailure):
    pass


# analysis
class DivisionByZero(OpinionEnvError, ZeroDivisionError):
    """Raised when an equilibrium quantity needs 1/gamma and gamma == 0."""


class Infeasible(OpinionEnvError, ValueError):
    """A closed-form condition has no admissible solution.

    ``constraint`` names the side condition that failed.
    """

    def __init__(self, constraint: str):
        super().__init__(constraint)
        self.constraint = constraint


class NotSingular(OpinionEnvError, ValueError):
    pass


class NotHopfPoint(OpinionEnvError, ValueError):
    pass
