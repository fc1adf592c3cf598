""" Exceptions raised across the package.

Errors are split in two families: `ValidationError` for inputs that
break a precondition and `NumericalError` for computations that fail on
valid input. The command line maps them to exit codes 2 and 3.
"""


class ValidationError(Exception):
    pass


class NumericalError(Exception):
    pass


class SelfLoop(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class Disconnected(ValidationError):
    pass


class NodeOutOfRange(ValidationError):
    pass


class EmptyGraph(ValidationError):
    pass


class InvalidDistance(ValidationError):
    pass


class NegativeCoefficient(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class SameNode(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class DistanceMismatch(ValidationError):
    pass


class ModePreconditionViolated(ValidationError):
    pass


class BipartiteGraph(ValidationError):
    pass


class EdgeAlreadyPresent(ValidationError):
    pass


class BudgetExceeded(ValidationError):
    pass


class InsufficientGraphs(ValidationError):
    pass


class EmptyVector(ValidationError):
    pass


class GraphFormatError(ValidationError):
    pass


class NotSymmetric(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class DivergedLoss(NumericalError):

    """ Training produced a non-finite loss.

    The partially filled outcome is kept on `outcome` so callers can
    report how far training got.
    """

    def __init__(self, message, outcome=None):
        super(DivergedLoss, self).__init__(message)
        self.outcome = outcome


class KinkProximityWarning(UserWarning):
    """ A ReLU pre-activation lies too close to zero for derivatives. """
