"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """The requested quantity is a divergent integral or series."""


class BracketError(ValueError):
    """A root bracket does not enclose a sign change."""


class NumericError(ArithmeticError):
    """An iteration failed to converge or overflowed."""


class DegenerateSampleError(ValueError):
    """A sample statistic is undefined for this data (zero denominator)."""


class InsufficientDataError(ValueError):
    """Too few observations for the requested procedure."""


class RangeError(ValueError):
    """A value falls outside the range covered by a table."""
