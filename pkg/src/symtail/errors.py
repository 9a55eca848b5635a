"""Exception hierarchy shared by every module."""


class SymtailError(Exception):
    """Base class for all library errors."""


class InputError(SymtailError, ValueError):
    """Malformed or non-finite input data."""


class ModeError(SymtailError, ValueError):
    """A value cannot be represented in the requested arithmetic mode."""


class DomainError(SymtailError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class DegeneratePivotError(SymtailError, ArithmeticError):
    """A float-mode ratio has a (numerically) vanishing denominator."""


class ConfigurationError(SymtailError, ValueError):
    """Invalid sampler, schedule or run parameters."""


class EnumerationBudgetError(SymtailError):
    """Full support enumeration would exceed the allowed budget."""

    def __init__(self, required, budget):
        super().__init__(
            f"support enumeration needs {required} rows, budget is {budget}"
        )
        self.required = required
        self.budget = budget


class MergeError(SymtailError, ValueError):
    """Reports from different command families cannot be merged."""
