"""Exception hierarchy shared by all starval modules."""


class StarvalError(Exception):
    """Base class for every error raised by starval."""


class InvalidArgument(StarvalError, ValueError):
    pass


class GridMismatch(InvalidArgument):
    """Two sampled objects do not live on the same grid."""


class DomainError(StarvalError, ValueError):
    """A value falls outside the domain a curve or valuation is defined on."""


class UnsupportedOperation(StarvalError):
    pass


class NotAStarSet(InvalidArgument):
    pass


class UnboundedBody(InvalidArgument):
    pass


class BudgetExceeded(StarvalError):
    """Exhaustive search would need more evaluations than allowed."""

    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(
            f"exhaustive search needs {required} evaluations, budget is {budget}"
        )
