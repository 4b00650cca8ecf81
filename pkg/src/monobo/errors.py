"""Exception types shared across the package."""


class MonoboError(Exception):
    """Base class for package errors."""


class NumericError(MonoboError):
    """A linear-algebra or floating-point operation failed beyond recovery."""


class FitError(NumericError):
    """Every candidate evaluated during a hyperparameter search failed."""


class TrialError(MonoboError):
    """An optimization trial aborted; carries the records completed so far."""

    def __init__(self, message, partial_records):
        super().__init__(message)
        self.partial_records = list(partial_records)


class ExternalObjectiveError(MonoboError):
    """Base class for failures of the subprocess objective protocol."""


class ProcessFailedError(ExternalObjectiveError):
    """Adapter process exited with a nonzero status."""


class ProcessTimeoutError(ExternalObjectiveError):
    """Adapter process exceeded its time limit."""


class MalformedResponseError(ExternalObjectiveError):
    """Adapter output was not a valid single-line JSON response."""


class ComponentArityError(ExternalObjectiveError):
    """Adapter returned the wrong number of component values."""
