"""Exception hierarchy shared by all modules."""


class ReadoutError(Exception):
    """Base class for every error raised by readout_forge."""


class DomainError(ReadoutError, ValueError):
    """A parameter violates a model invariant.

    ``field`` names the offending quantity so callers (and the CLI) can
    report it without parsing the message.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class RangeError(ReadoutError, ValueError):
    """A requested time or index lies outside the available data."""


class IntegrationError(ReadoutError, RuntimeError):
    pass


class QuadratureError(ReadoutError, RuntimeError):
    pass


class ConvergenceError(ReadoutError, RuntimeError):
    pass


class ResolutionError(ReadoutError, RuntimeError):
    """Sampling grid too coarse for the requested quadrature accuracy."""


class UnsupportedCombination(ReadoutError, ValueError):
    pass


class LabelingError(ReadoutError, RuntimeError):
    """Two dressed eigenstates claim the same bare label."""

    def __init__(self, message, conflicts=None):
        super().__init__(message)
        self.conflicts = conflicts or []


class TraceDriftError(ReadoutError, RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class TruncationError(ReadoutError, RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
