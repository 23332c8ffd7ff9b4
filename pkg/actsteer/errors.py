"""Exception hierarchy shared by every actsteer module."""


class SteerError(Exception):
    """Base class for actsteer errors."""


class InvalidInputError(SteerError, ValueError):
    """Malformed samples: wrong shapes, too few rows, non-finite values."""


class DegenerateSourceError(InvalidInputError):
    """Source sample has zero spread, so slope estimators are undefined."""


class ConfigurationError(SteerError, ValueError):
    """Unknown estimator, layer id, support spec or mismatched widths."""


class UsageError(ConfigurationError):
    """Bad command-line invocation."""


class DegenerateClassifierError(SteerError, RuntimeError):
    """The linear probe could not find any separating direction."""


class FoldUnsupportedError(SteerError, ValueError):
    """Maps with bounded support cannot be folded into a linear layer."""
