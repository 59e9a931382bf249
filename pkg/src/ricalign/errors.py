"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class RicError(Exception):
    """Base class for every error raised by ricalign."""


class SchemaError(RicError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ExtractionError(RicError):
    pass


class ResponseError(RicError):
    """A scorer reply that could not be turned into a valid score vector."""


class MalformedResponse(ResponseError):
    pass


class OutOfRange(ResponseError):
    def __init__(self, key: str, value: object):
        self.key = key
        self.value = value
        super().__init__(f"{key}={value!r} outside [0, 1]")


class MissingKey(ResponseError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"missing key {key}")


class AuthError(RicError):
    pass


class TransportError(RicError):
    pass


class RateLimitExceeded(TransportError):
    pass


class NonFiniteValue(RicError):
    pass


class MixedArticle(RicError):
    pass


class InsufficientRuns(RicError):
    pass


class EmptyInput(RicError):
    pass


class ConfigError(RicError):
    pass
