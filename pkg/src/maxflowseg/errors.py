"""Exception types raised by the package."""


class MaxflowSegError(Exception):
    """Base class for all package errors."""


class NumericalDivergence(MaxflowSegError):
    """A solver field became non-finite (usually a step size that is too large)."""

    def __init__(self, message, inner_iteration=None, outer_iteration=None):
        super().__init__(message)
        self.inner_iteration = inner_iteration
        self.outer_iteration = outer_iteration

    def __str__(self):
        msg = super().__str__()
        where = []
        if self.outer_iteration is not None:
            where.append(f"outer iteration {self.outer_iteration}")
        if self.inner_iteration is not None:
            where.append(f"inner iteration {self.inner_iteration}")
        return f"{msg} ({', '.join(where)})" if where else msg


class EmptyImage(MaxflowSegError):
    pass


class ShapeMismatch(MaxflowSegError, ValueError):
    pass


class EmptyMask(MaxflowSegError, ValueError):
    pass


class InvalidSpec(MaxflowSegError, ValueError):
    pass


class UnsupportedFormat(MaxflowSegError):
    pass


class CorruptFile(MaxflowSegError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class IoFailure(MaxflowSegError, OSError):
    pass
