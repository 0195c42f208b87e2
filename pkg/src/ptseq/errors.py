"""Exception types shared across the package."""


class PtseqError(Exception):
    """Base class for every error raised by ptseq."""

    code = "error"


class DomainError(PtseqError, ValueError):
    """A value lies outside the mathematical domain of an operation."""

    code = "domain"


class ArgumentError(PtseqError, ValueError):
    """An argument is malformed, inconsistent, or out of range."""

    code = "argument"


class FormatError(PtseqError, ValueError):
    """An input file does not follow the expected format."""

    code = "format"
