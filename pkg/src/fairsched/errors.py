"""Exception hierarchy shared by every module."""


class FairSchedError(Exception):
    """Base class for all errors raised by this package."""


class InstanceParseError(FairSchedError, ValueError):
    """Input bytes could not be decoded into an instance."""

    def __init__(self, message, line=None, offset=None):
        self.line = line
        self.offset = offset
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", offset {offset})" if offset is not None else ")")
        super().__init__(message + where)


class InstanceValidationError(FairSchedError, ValueError):
    """A job size is negative, non-finite or otherwise unusable."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class ParameterError(FairSchedError, ValueError):
    """A numeric parameter lies outside its documented domain."""


class DegenerateInstanceError(FairSchedError, ValueError):
    """A ratio was requested on an instance with zero total work."""


class InfeasibleError(FairSchedError, RuntimeError):
    """Exact enumeration would exceed the configured outcome cap."""

    def __init__(self, message, outcomes=None, cap=None):
        self.outcomes = outcomes
        self.cap = cap
        super().__init__(message)
