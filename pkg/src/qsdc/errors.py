"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class ConsistencyError(RuntimeError):
    """Internal numerical state is corrupt (e.g. a state lost its norm)."""


class ConfigurationError(ValueError):
    pass


class ChannelViolation(RuntimeError):
    """A non-rewriting adversary altered a public-channel message."""


class AbortedAfterRetries(RuntimeError):
    """Restart policy exceeded its cap; ``result`` holds the partial session."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
