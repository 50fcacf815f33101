"""Exception hierarchy shared by all pipeline stages.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
ProviderError -> 3.
"""


class ParmineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ParmineError):
    """Bad configuration or usage: missing files, invalid parameters."""


class DataError(ParmineError):
    """Malformed or inconsistent input data."""


class ProviderError(ParmineError):
    """Embedding/translation provider failure (possibly transient)."""

    def __init__(self, message, retryable=False):
        super().__init__(message)
        self.retryable = retryable
