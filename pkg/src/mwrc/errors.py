"""Exception hierarchy.

Every error raised by the package derives from :class:`MwrcError`, and the
class name doubles as the machine-readable error code printed by the CLI.
"""


class MwrcError(ValueError):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# distribution
class NegativeProbability(MwrcError):
    pass


class SumNotOne(MwrcError):
    pass


class ShapeMismatch(MwrcError):
    pass


class TooManyUsers(MwrcError):
    pass


class EmptySubset(MwrcError):
    pass


class OverlappingSubsets(MwrcError):
    pass


# imeasure / abcmi
class WeightOutOfRange(MwrcError):
    pass


class SingularSystem(MwrcError):
    pass


class ParameterOutOfRange(MwrcError):
    pass


class DivisionByZero(MwrcError):
    pass


# rates / channel
class DegenerateChannel(MwrcError):
    pass


class InconsistentRates(MwrcError):
    """Atom-based rate assignment produced a clearly negative rate."""


# simulator
class SymbolOutOfField(MwrcError):
    pass


class IndexOutOfRange(MwrcError):
    pass


class TractabilityExceeded(MwrcError):
    pass


class NotPrime(MwrcError):
    pass


# cli
class ProblemFileError(MwrcError):
    pass
