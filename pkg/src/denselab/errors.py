"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI:
  InvalidArgumentError -> 2, BudgetExceededError -> 3,
  RegimeError / InfeasibleError -> 4.
"""


class DenseLabError(Exception):
    pass


class InvalidArgumentError(DenseLabError, ValueError):
    """A precondition on user-supplied arguments was violated."""


class BudgetExceededError(DenseLabError):
    """An enumeration or search exceeded its configured budget."""


class RegimeError(DenseLabError):
    """Parameters fall outside the regime required by the operation."""


class InfeasibleError(DenseLabError):
    """Parameters are structurally infeasible (e.g. probability out of [0,1])."""
