"""Exception hierarchy shared by all blockspec modules."""


class BlockSpecError(Exception):
    """Base class for domain errors raised by the library."""


class InvalidParameterError(BlockSpecError, ValueError):
    pass


class DimensionMismatchError(BlockSpecError, ValueError):
    pass


class NonInvarianceError(BlockSpecError):
    """An operator moved mass out of a block of the partition."""

    def __init__(self, index, leak):
        self.index = index
        self.leak = leak
        super().__init__(
            f"operator is not invariant: block {index} leaks mass {leak:.3e} "
            "into other blocks"
        )


class NotUnitaryError(BlockSpecError):
    def __init__(self, index, residual):
        self.index = index
        self.residual = residual
        super().__init__(f"block {index} is not unitary (residual {residual:.3e})")


class PositivityError(BlockSpecError):
    """Truncated operator has significant negative spectrum."""
