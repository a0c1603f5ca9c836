"""Exception types shared across the harness.

The CLI maps these onto exit codes: validation-type failures exit 1,
backend/transport failures exit 2.
"""


class ValidationError(ValueError):
    """Malformed input data: bad schema, bad field, bad file."""


class IntegrityError(ValueError):
    """Internally inconsistent state: duplicate ids, dangling references,
    embedding dimension drift."""


class ConfigurationError(ValueError):
    """Unusable configuration, e.g. a missing credential variable."""


class BackendError(RuntimeError):
    """A model backend failed after retries were exhausted.

    ``request_key`` is the cache key of the failing request so the exact
    call can be located and replayed.
    """

    def __init__(self, message: str, request_key: str = ""):
        super().__init__(message)
        self.request_key = request_key


class NoFixtureError(BackendError):
    """A mock backend was asked for a prompt it has no fixture for."""
