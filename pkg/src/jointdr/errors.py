"""Exception types raised by jointdr.

Validation problems (bad shapes, bad budgets, bad arguments) derive from
``ValidationError``; failures of the numerics on otherwise valid input derive
from ``NumericalError``. The CLI maps the two families to distinct exit codes.
"""


class JDRError(Exception):
    pass


class ValidationError(JDRError, ValueError):
    pass


class NumericalError(JDRError, ArithmeticError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    def __init__(self, name, index):
        self.name = name
        self.index = tuple(int(i) for i in index)
        super().__init__(f"non-finite value in {name} at {self.index}")


class RankTooLarge(ValidationError):
    pass


class BudgetOutOfRange(ValidationError):
    pass


class NotOrthonormal(ValidationError):
    pass


class NonPositiveValue(ValidationError):
    pass


class EmptyPositives(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class DegenerateData(NumericalError):
    pass
