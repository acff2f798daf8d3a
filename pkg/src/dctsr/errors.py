"""Exception types raised across the package."""


class SRError(Exception):
    """Base class for all package errors."""


class FormatError(SRError, ValueError):
    """Malformed or unsupported file contents."""


class ParameterError(SRError, ValueError):
    """Invalid argument value or shape."""


class BoundsError(ParameterError):
    """Requested region exceeds the available extent."""


class DegenerateInputError(SRError, ValueError):
    """Input carries no usable signal (e.g. a constant image)."""


class StreamError(SRError, ValueError):
    """Truncated or corrupt staged bitstream."""

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset
