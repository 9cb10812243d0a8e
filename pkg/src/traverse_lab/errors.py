"""Exception types shared across the package."""


class TraverseLabError(Exception):
    """Base class for all package errors."""


class ParseError(TraverseLabError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DomainError(TraverseLabError, ValueError):
    """A function was evaluated outside its real domain."""


class IllConditioned(TraverseLabError):
    pass


class NotInDomain(TraverseLabError):
    pass


class Degenerate(TraverseLabError):
    """Tangency of order >= 3 or an unclassifiable boundary point."""


class TimeBudgetExceeded(TraverseLabError):
    """A trajectory failed to leave the domain; evidence of a non-traversing field."""


class MonotonicityViolation(TraverseLabError):
    pass


class NoExit(TraverseLabError):
    pass


class NoTangent(TraverseLabError):
    pass


class Ambiguous(TraverseLabError):
    pass


class ConfigError(TraverseLabError):
    pass
