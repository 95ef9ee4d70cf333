"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Bad input shape, range or option."""


class PreconditionError(ValueError):
    """An operation's documented input contract was not met."""


class ParseError(ValueError):
    """Malformed game or profile file."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ResourceLimitError(RuntimeError):
    """A configured size guardrail would be exceeded."""


class InternalConsistencyError(RuntimeError):
    """A result that the algorithm guarantees failed its own check."""
