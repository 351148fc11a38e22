"""
Exceptions raised by the LTL checker.

A failed property is not an exception; it is a verdict in the report.
"""


class LtlError(Exception):
    """Base class for checker errors."""


class FormulaSyntaxError(LtlError):
    """Formula text could not be parsed."""

    def __init__(self, message: str, column: int = -1):
        self.column = column
        super().__init__(f"column {column}: {message}" if column >= 0 else message)


class UnknownProposition(LtlError):
    """A formula names a proposition the trace does not define."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown proposition {name!r}")


class BudgetExceeded(LtlError):
    """An exhaustive check would explore more than the configured budget."""

    def __init__(self, estimate: int, budget: int):
        self.estimate = estimate
        self.budget = budget
        super().__init__(f"enumeration of about {estimate} nodes exceeds the budget of {budget}")
