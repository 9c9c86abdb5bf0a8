"""Exception types shared across the package."""

import os

DEFAULT_BUDGET = 10_000_000
BUDGET_ENV_VAR = "TIE_POISSON_BUDGET"


class ValidationError(ValueError):
    """A parameter or distribution violates its contract (bad pmf, r out of range, ...)."""


class ResourceBudgetError(RuntimeError):
    """An exact computation would exceed the enumeration budget."""

    def __init__(self, needed: int, budget: int, what: str = "enumeration states"):
        self.needed = needed
        self.budget = budget
        super().__init__(
            f"{what}: {needed} exceeds budget {budget} "
            f"(override with {BUDGET_ENV_VAR} or an explicit budget argument)"
        )


def resolve_budget(budget=None) -> int:
    """Explicit argument wins, then the TIE_POISSON_BUDGET env var, then the default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_BUDGET
