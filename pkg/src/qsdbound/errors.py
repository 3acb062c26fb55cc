"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (or :class:`ParseError`
for unreadable files); numerical breakdowns derive from
:class:`NumericalError`. The CLI maps the two families to distinct exit codes.
"""


class QsdError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QsdError, ValueError):
    """An input violates a documented precondition.

    ``path`` names the offending field (``"entries[2].prob"``) when the
    input came from a structured document, and is ``None`` otherwise.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class ParseError(QsdError, ValueError):
    """A file could not be decoded into the expected schema."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NotHermitian(ValidationError):
    pass


class NotPsd(ValidationError):
    pass


class InvalidP(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class CountMismatch(ValidationError):
    pass


class BadPriors(ValidationError):
    pass


class BadState(ValidationError):
    pass


class BadPovm(ValidationError):
    pass


class NotTwoStates(ValidationError):
    pass


class NonUniformPriors(ValidationError):
    pass


class NotPureStates(ValidationError):
    pass


class TooFewStates(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class InvalidInput(ValidationError):
    pass


class NumericalError(QsdError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy answer."""


class NoConvergence(NumericalError):
    """An iterative routine hit its iteration limit.

    ``result`` carries the best answer found so far, when there is one.
    """

    def __init__(self, message, result=None):
        self.result = result
        super().__init__(message)
