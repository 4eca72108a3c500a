"""Exception types shared across the package."""


class NotAGroup(ValueError):
    """A multiplication table failed one of the group axioms."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ClosureBoundExceeded(RuntimeError):
    pass


class NonUnitaryGenerator(ValueError):
    pass


class GroupMismatch(ValueError):
    pass


class NotACocycle(ValueError):
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class NotACoboundary(ValueError):
    """Raised when ``delta beta = c`` has no solution over Z_n.

    ``certificate`` holds the index of the inconsistent row of the
    Smith-reduced system together with its diagonal entry and right-hand side.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class OrderTooLarge(ValueError):
    pass


class NotProjective(ValueError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class PhaseOffGrid(ValueError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ClassMismatch(ValueError):
    pass


class OverlappingBonds(ValueError):
    pass


class LayoutMismatch(ValueError):
    pass


class DimensionTooLarge(ValueError):
    pass


class UnsupportedCombination(ValueError):
    pass


class UnknownSymbol(KeyError):
    pass


class NotFixedPoint(ValueError):
    pass
