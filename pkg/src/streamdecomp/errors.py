"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Bad shapes, non-finite values or out-of-range parameters."""


class NumericFailureError(RuntimeError):
    """An iterative numerical routine failed to produce a usable result."""


class ConsistencyError(RuntimeError):
    """An internal invariant was violated; indicates a bug rather than bad input."""


class ContainerError(ValueError):
    """A dataset container could not be decoded."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
