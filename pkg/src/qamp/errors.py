"""Exception hierarchy.

Validation errors (bad parameters) derive from ``ValueError`` as well so that
callers catching the builtin keep working; simulation errors mark a trial
that could not produce an answer.
"""


class QampError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QampError, ValueError):
    """A parameter or configuration value is out of its allowed domain."""


class AngleOutOfRange(ValidationError):
    pass


class InvalidCloneParams(ValidationError):
    pass


class InvalidSplit(ValidationError):
    pass


class SimulationError(QampError):
    """A single trial could not be completed (counted as a failure)."""


class ParityUndefined(SimulationError):
    pass


class DegenerateDirection(SimulationError):
    pass


class InsufficientPhotons(SimulationError):
    pass
