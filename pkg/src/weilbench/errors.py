class WeilbenchError(Exception):
    """Base class for errors raised by this package."""


class BudgetExceeded(WeilbenchError):
    """An enumeration or matrix size exceeded its explicit budget."""

    def __init__(self, what: str, size: int, budget: int):
        self.what = what
        self.size = size
        self.budget = budget
        super().__init__(f"{what}: size {size} exceeds budget {budget}")


class FieldMismatch(WeilbenchError, ValueError):
    pass


class SingularMatrix(WeilbenchError, ZeroDivisionError):
    pass


class Degenerate(WeilbenchError, ValueError):
    """Input lies on a degenerate locus (zero determinant, bad parameters)."""
