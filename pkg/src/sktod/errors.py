"""Exception hierarchy shared across the engine.

CLI exit codes map onto this hierarchy: DataError -> 2,
ExternalServiceError -> 3, anything else unexpected -> 1.
"""


class SktodError(Exception):
    """Base class for all engine errors."""


class DataError(SktodError):
    """Malformed, inconsistent, or missing data."""


class ParseError(DataError):
    """Structured-text document failed to parse.

    Carries the byte offset of the failure when known.
    """

    def __init__(self, message: str, path: str | None = None, offset: int | None = None):
        self.path = path
        self.offset = offset
        loc = ""
        if path is not None:
            loc += f" in {path}"
        if offset is not None:
            loc += f" at byte {offset}"
        super().__init__(message + loc)


class IntegrityError(DataError):
    """Duplicate keys or dangling references in loaded data."""


class AlignmentError(DataError):
    """Parallel files (logs/labels) disagree on length or ids."""


class ConfigError(SktodError):
    """Invalid configuration or precondition violation."""


class ExternalServiceError(SktodError):
    """Transport-level failure talking to an external scorer/tagger/generator."""


class ProtocolError(ExternalServiceError):
    """External service replied, but the reply violates the wire protocol."""


class GenerationError(SktodError):
    """Response generation failed on a well-formed input."""
