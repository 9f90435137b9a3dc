"""Exception hierarchy.

Every domain error derives from :class:`BMTMError` so callers (and the CLI)
can catch them in one place. The class name doubles as the machine-readable
error code printed by the CLI.
"""


class BMTMError(ValueError):
    pass


# tree structure
class InvalidTree(BMTMError):
    pass


class DegreeViolation(InvalidTree):
    pass


class CycleDetected(InvalidTree):
    pass


class Disconnected(InvalidTree):
    pass


class UnknownNode(BMTMError, KeyError):
    pass


class UnknownLeaf(UnknownNode):
    pass


class InvalidSparsity(BMTMError):
    pass


class NotFullyObserved(BMTMError):
    pass


class TooLarge(BMTMError):
    pass


class TooSmall(BMTMError):
    pass


class ParseError(BMTMError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


# data
class DuplicateValue(BMTMError):
    pass


class ZeroValue(BMTMError):
    pass


class NoDuplicate(BMTMError):
    pass


class DegenerateContrast(BMTMError):
    pass


# matrices
class NotPositiveDefinite(BMTMError):
    pass


class SingularCovariance(NotPositiveDefinite):
    pass


class ZeroCovariance(BMTMError):
    pass


class NotDDM(BMTMError):
    pass


class NotLaplacian(BMTMError):
    pass


class ZeroTotal(BMTMError):
    pass


class DisconnectedSupport(BMTMError):
    pass


class SpectrumViolation(BMTMError):
    pass


class NonConvergence(BMTMError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
