"""Poisson and product-of-independent-Poisson reference laws.

Truncated with an accounted tail so that TV comparisons against exact or
empirical laws stay honest about the dropped mass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import ResourceBudgetError, ValidationError, resolve_budget
from .exact_oracle import Law


@dataclass(frozen=True)
class PoissonSpec:
    """Means of the target Poisson components plus a truncation tolerance."""

    means: tuple
    truncation_tolerance: float = 1e-12

    def __post_init__(self):
        if not self.means:
            raise ValidationError("PoissonSpec needs at least one mean")
        if any(not math.isfinite(m) or m < 0 for m in self.means):
            raise ValidationError(f"Poisson means must be finite and >= 0: {self.means}")
        if self.truncation_tolerance <= 0:
            raise ValidationError("truncation_tolerance must be positive")


def poisson_law(spec: PoissonSpec) -> Law:
    """Univariate Poisson law truncated at the smallest K with tail <= tolerance.

    Masses come from the multiplicative recurrence P(k+1) = P(k) * lam/(k+1)
    started at P(0) = e^-lam, so no factorials are formed; the tail is the
    complement of the accumulated sum, not an approximation.
    """
    if len(spec.means) != 1:
        raise ValidationError("poisson_law needs a univariate spec")
    lam = spec.means[0]
    if lam == 0.0:
        return Law({0: 1.0}, 0.0)
    support = {}
    mass = math.exp(-lam)
    cumulative = mass
    support[0] = mass
    k = 0
    while 1.0 - cumulative > spec.truncation_tolerance:
        k += 1
        mass *= lam / k
        support[k] = mass
        cumulative += mass
    return Law(support, max(0.0, 1.0 - cumulative))


def product_poisson_law(spec: PoissonSpec, budget=None) -> Law:
    """Law of a vector of independent Poissons, per-coordinate truncation.

    The combined tail is 1 - prod_a (1 - tail_a), i.e. the probability that
    any coordinate escapes its truncated range.
    """
    budget = resolve_budget(budget)
    components = [poisson_law(PoissonSpec((m,), spec.truncation_tolerance)) for m in spec.means]
    size = 1
    for comp in components:
        size *= len(comp.support)
        if size > budget:
            raise ResourceBudgetError(size, budget, "product Poisson support size")
    support: dict = {}
    items = [comp.items_sorted() for comp in components]
    for combo in itertools.product(*items):
        outcome = tuple(k for k, _ in combo)
        mass = 1.0
        for _, m in combo:
            mass *= m
        support[outcome] = mass
    kept = 1.0
    for comp in components:
        kept *= 1.0 - comp.tail_error
    return Law(support, max(0.0, 1.0 - kept))
