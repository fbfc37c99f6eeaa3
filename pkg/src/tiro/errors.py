"""Exception hierarchy shared across the package."""


class TiroError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TiroError):
    """Malformed model/word/diff input. Carries file line context when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class DomainError(TiroError):
    """Operation applied outside its domain (empty word, mismatched intervals, ...)."""


class AlphabetError(TiroError):
    """Letter or word does not belong to the expected alphabet."""


class CircuitError(TiroError):
    """Structurally invalid gate network (delay-free feedback, bad arity, ...)."""


class PreconditionError(TiroError):
    """A documented precondition of an operation does not hold."""


class ResourceExceededError(TiroError):
    """State budget exhausted before a verdict could be established."""

    def __init__(self, message, explored=None):
        super().__init__(message)
        self.explored = explored
