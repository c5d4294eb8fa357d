"""Exception hierarchy.

The CLI maps these onto its exit codes: configuration problems exit 1,
infeasible or degenerate input exits 2, numerical failures exit 3.
"""


class FilamentError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(FilamentError, ValueError):
    """Bad parameters: grid too small, wrong array shapes, unknown options."""


class InfeasibleError(FilamentError, ValueError):
    """The requested object does not exist for these parameters."""


class DegenerateError(FilamentError, ValueError):
    """Input sits on a degenerate case the library refuses to guess about."""


class PreconditionError(FilamentError, ValueError):
    """A documented precondition of an operation is violated."""


class SymmetryError(FilamentError, ValueError):
    """A field is not in the symmetric subspace."""

    def __init__(self, message, defect):
        super().__init__(message)
        self.defect = defect


class DomainError(FilamentError, ArithmeticError):
    """Pointwise field magnitude left the analyticity disk of the nonlinearity."""


class DivergenceError(FilamentError, ArithmeticError):
    """An iteration failed to converge."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class ContinuationError(FilamentError, ArithmeticError):
    """Branch continuation gave up; carries the last converged point."""

    def __init__(self, message, last_point=None, points=()):
        super().__init__(message)
        self.last_point = last_point
        self.points = list(points)


class CollisionError(FilamentError, ArithmeticError):
    """Two filaments came closer than the collision guard."""

    def __init__(self, message, pair=None, s_index=None, distance=None):
        super().__init__(message)
        self.pair = pair
        self.s_index = s_index
        self.distance = distance


class SingularityError(FilamentError, ArithmeticError):
    """|w| dropped below the floor of the 1/|w|^2 nonlinearity."""
