"""Exception hierarchy shared by all modules."""


class ExtCalcError(Exception):
    """Base class for every error raised by extcalc."""


class ParseError(ExtCalcError, ValueError):
    """Malformed input text.

    Attributes:
        offset: byte offset (UTF-8) into the source where parsing stopped.
        expected: set of token descriptions that would have been accepted.
    """

    def __init__(self, message, source="", offset=0, expected=()):
        super().__init__(message)
        self.message = message
        self.source = source
        self.offset = offset
        self.expected = frozenset(expected)

    def __str__(self):
        detail = self.message
        if self.expected:
            detail += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        return f"{detail} at byte {self.offset}"

    def relocate(self, source, byte_delta):
        """Shift the offset so it points into an enclosing ``source`` text."""
        self.source = source
        self.offset += byte_delta
        return self


class UnknownIdentifierError(ParseError):
    """An identifier that is neither a coordinate name nor a known function."""

    def __init__(self, name, source="", offset=0):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", source, offset)


class DomainError(ExtCalcError, ArithmeticError):
    """Evaluation left the domain of an operation (x/0, sqrt(-1), overflow)."""


class DimensionError(ExtCalcError, ValueError):
    """Degrees or dimensions of the operands do not fit together."""
