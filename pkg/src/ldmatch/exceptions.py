"""Exception hierarchy shared by the library and the command line."""


class LdMatchError(Exception):
    """Base class for all errors raised by ldmatch."""


class ConfigError(LdMatchError, ValueError):
    """Invalid parameters: window/feature sizes, query lengths, tolerances."""


class DataError(LdMatchError, ValueError):
    """Malformed or unusable input data."""


class IndexFormatError(DataError):
    """An index file is corrupt, truncated, or of an unsupported version."""


class EquivalenceError(LdMatchError, AssertionError):
    """Indexed matching disagreed with the sequential scan.

    ``bundle`` carries whatever is needed to reproduce the failing trial.
    """

    def __init__(self, message, bundle=None):
        super().__init__(message)
        self.bundle = dict(bundle or {})
