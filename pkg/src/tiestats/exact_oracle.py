"""Exact ground-truth laws of tie statistics on small instances.

Three independent enumeration routes are provided and cross-checked in the
test suite:

* an occupancy-composition dynamic program over the effective support
  (general pmfs, truncated geometric included, with the dropped tail mass
  carried as an explicit ``tail_error``);
* a partition enumeration for uniform pmfs that exploits exchangeability of
  the boxes (exact rational arithmetic, never materializes N entries per
  configuration);
* a naive product enumeration over all S^n assignments, kept as the
  dual-path check for tiny instances.

The module also hosts the total variation distance between laws and an
exhaustive verification of the forced-move coupling identity used by the
error bounds.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .distributions import DiscretePMF, Instance
from .errors import ResourceBudgetError, ValidationError, resolve_budget

Outcome = "int | tuple[int, ...]"


@dataclass
class Law:
    """A probability law over integer outcomes (or integer vectors).

    ``tail_error`` is the unaccounted mass: zero for exhaustive enumeration
    over a finite support, positive when a truncated support dropped mass.
    """

    support: dict
    tail_error: float = 0.0

    def __post_init__(self):
        if self.tail_error < -1e-12:
            raise ValidationError(f"negative tail_error {self.tail_error}")
        if any(m < -1e-12 for m in self.support.values()):
            raise ValidationError("law has a negative mass")
        total = math.fsum(self.support.values()) + self.tail_error
        if not 1 - 1e-10 <= total <= 1 + 1e-10:
            raise ValidationError(f"law masses + tail sum to {total}, not 1")

    @property
    def dimension(self) -> int:
        """1 for scalar outcomes, vector length otherwise."""
        for outcome in self.support:
            return len(outcome) if isinstance(outcome, tuple) else 1
        return 1

    def items_sorted(self):
        return sorted(self.support.items())

    def mass(self, outcome) -> float:
        return self.support.get(outcome, 0.0)

    def mean(self) -> float:
        if self.dimension != 1:
            raise ValidationError("mean() is for scalar laws; use means()")
        return math.fsum(o * m for o, m in self.support.items())

    def means(self) -> tuple:
        if self.dimension == 1:
            return (self.mean(),)
        d = self.dimension
        return tuple(
            math.fsum(o[i] * m for o, m in self.support.items()) for i in range(d)
        )

    def variance(self) -> float:
        mu = self.mean()
        return math.fsum((o - mu) ** 2 * m for o, m in self.support.items())

    def marginal(self, index: int) -> "Law":
        """Sum out all coordinates but one of a vector law."""
        if self.dimension == 1:
            raise ValidationError("marginal() needs a vector law")
        out: dict = {}
        for o, m in self.support.items():
            out[o[index]] = out.get(o[index], 0.0) + m
        return Law(out, self.tail_error)

    def to_json_dict(self) -> dict:
        entries = []
        for o, m in self.items_sorted():
            key = list(o) if isinstance(o, tuple) else [o]
            entries.append([key, m])
        return {"support": entries, "tail_error": self.tail_error}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Law":
        support = {}
        for key, m in obj["support"]:
            outcome = tuple(key) if len(key) > 1 else key[0]
            support[outcome] = m
        return cls(support, obj.get("tail_error", 0.0))


@dataclass(frozen=True)
class Configuration:
    """One full assignment of the n scores, with its probability."""

    assignment: tuple
    probability: float

    def counts(self) -> Counter:
        return Counter(self.assignment)


# ---------------------------------------------------------------------------
# statistics of a box-count vector

def pairs_statistic(counts) -> int:
    """W: number of tied pairs; a box with c balls contributes C(c,2)."""
    return sum(c * (c - 1) // 2 for c in counts)


def strict_tie_count(counts, r: int) -> int:
    """Y_r: number of boxes holding exactly r balls."""
    return sum(1 for c in counts if c == r)


def tie_spectrum(counts, A: int, B: int) -> tuple:
    """(Y_A, ..., Y_B): strict tie counts for every order in the window."""
    tally = Counter(counts)
    return tuple(tally.get(a, 0) for a in range(A, B + 1))


# ---------------------------------------------------------------------------
# enumeration engines

def _dp_law(values, masses, tail, n, fold, budget) -> Law:
    """Exact law of a per-box-additive statistic by DP over the support.

    Implicitly enumerates all compositions (c_1, ..., c_S) of n with the
    multinomial weight n!/prod(c_i!) * prod(q_i^c_i), merging compositions
    that agree on (balls placed, partial statistic).  Mass on assignments
    that touch the truncated tail is routed to ``tail_error``.
    """
    states = {(n, fold(None, None)): 1.0}
    work = 0
    for q in masses:
        new_states: dict = {}
        for (remaining, stat), w in states.items():
            weight_c = w  # C(remaining, c) q^c, updated multiplicatively
            for c in range(remaining + 1):
                work += 1
                if work > budget:
                    raise ResourceBudgetError(work, budget, "composition DP transitions")
                key = (remaining - c, fold(stat, c))
                new_states[key] = new_states.get(key, 0.0) + weight_c
                weight_c *= q * (remaining - c) / (c + 1)
        states = new_states
    support: dict = {}
    tail_error = 0.0
    for (remaining, stat), w in states.items():
        if remaining == 0:
            support[stat] = support.get(stat, 0.0) + w
        elif tail > 0.0:
            tail_error += w * tail**remaining
        # tail == 0 and remaining > 0: unreachable mass, weight is 0 anyway
    return Law(support, tail_error)


def _partitions(n: int, max_part: int):
    """Partitions of n into parts <= max_part, parts non-increasing."""
    if n == 0:
        yield []
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - first, first):
            yield [first] + rest


def _uniform_law(N: int, n: int, outcome_of_parts, budget) -> Law:
    """Exact law for a uniform pmf via occupancy partitions (exchangeability).

    The law of any symmetric statistic depends only on the multiset of box
    counts, so the sum over N^n assignments collapses to a sum over integer
    partitions of n.  Weights are exact rationals, rounded once at the end.
    """
    acc: dict = {}
    denominator = N**n
    n_fact = math.factorial(n)
    seen = 0
    for parts in _partitions(n, n):
        seen += 1
        if seen > budget:
            raise ResourceBudgetError(seen, budget, "occupancy partitions")
        k = len(parts)
        if k > N:
            continue
        ways_boxes = math.perm(N, k)
        for mult in Counter(parts).values():
            ways_boxes //= math.factorial(mult)
        ways_balls = n_fact
        for c in parts:
            ways_balls //= math.factorial(c)
        outcome = outcome_of_parts(parts)
        acc[outcome] = acc.get(outcome, Fraction(0)) + Fraction(
            ways_boxes * ways_balls, denominator
        )
    assert sum(acc.values()) == 1
    return Law({o: float(m) for o, m in acc.items()}, 0.0)


def _statistic_law(inst: Instance, fold, outcome_of_parts, budget=None) -> Law:
    budget = resolve_budget(budget)
    if inst.pmf.kind == "uniform":
        return _uniform_law(inst.pmf.N, inst.n, outcome_of_parts, budget)
    values, masses, tail = inst.pmf.support_masses()
    return _dp_law(values, masses, tail, inst.n, fold, budget)


def exact_law_W(inst: Instance, budget=None) -> Law:
    """Exact law of the pairwise tie count W."""

    def fold(stat, c):
        if stat is None:
            return 0
        return stat + c * (c - 1) // 2

    return _statistic_law(inst, fold, pairs_statistic, budget)


def exact_law_Yr(inst: Instance, r: int, budget=None) -> Law:
    """Exact law of the strict r-way tie count Y_r."""
    if not 2 <= r <= inst.n:
        raise ValidationError(f"tie order r={r} must satisfy 2 <= r <= n={inst.n}")

    def fold(stat, c):
        if stat is None:
            return 0
        return stat + (1 if c == r else 0)

    return _statistic_law(inst, fold, lambda parts: strict_tie_count(parts, r), budget)


def exact_joint_law(inst: Instance, A: int, B: int, budget=None) -> Law:
    """Exact joint law of the vector (Y_A, ..., Y_B)."""
    if not 2 <= A <= B <= inst.n:
        raise ValidationError(f"window must satisfy 2 <= A <= B <= n; got ({A}, {B})")

    def fold(stat, c):
        if stat is None:
            return (0,) * (B - A + 1)
        if A <= c <= B:
            i = c - A
            return stat[:i] + (stat[i] + 1,) + stat[i + 1 :]
        return stat

    return _statistic_law(inst, fold, lambda parts: tie_spectrum(parts, A, B), budget)


def enumerate_configurations(inst: Instance, budget=None):
    """All S^n assignments over the effective support, with probabilities."""
    budget = resolve_budget(budget)
    values, masses, _ = inst.pmf.support_masses()
    total = len(values) ** inst.n
    if total > budget:
        raise ResourceBudgetError(total, budget, "naive assignment enumeration")
    for combo in itertools.product(range(len(values)), repeat=inst.n):
        prob = 1.0
        for i in combo:
            prob *= masses[i]
        yield Configuration(tuple(values[i] for i in combo), prob)


def naive_law(inst: Instance, statistic_of_counts, budget=None) -> Law:
    """Law by brute-force product enumeration; the dual-path check.

    ``statistic_of_counts`` maps a box-count Counter to the outcome, e.g.
    ``lambda c: pairs_statistic(c.values())``.
    """
    support: dict = {}
    mass_seen = 0.0
    for config in enumerate_configurations(inst, budget):
        outcome = statistic_of_counts(config.counts())
        support[outcome] = support.get(outcome, 0.0) + config.probability
        mass_seen += config.probability
    return Law(support, max(0.0, 1.0 - mass_seen))


def birthday_no_tie_probability(N: int, n: int) -> float:
    """P(all n scores distinct) for a uniform support of size N.

    Falling-factorial product prod_{k=1}^{n-1} (1 - k/N); the independent
    oracle for P(W = 0) at occupancy scales where full enumeration is out.
    """
    if n > N:
        return 0.0
    prod = 1.0
    for k in range(1, n):
        prod *= 1.0 - k / N
    return prod


# ---------------------------------------------------------------------------
# total variation distance

def _check_comparable(law1: Law, law2: Law) -> None:
    if law1.support and law2.support and law1.dimension != law2.dimension:
        raise ValidationError(
            f"outcome types differ: dimension {law1.dimension} vs {law2.dimension}"
        )


def exact_tv(law1: Law, law2: Law) -> float:
    """Total variation distance between two laws.

    Half the L1 distance on the accounted supports plus half the combined
    tail mass; exact for finite laws with zero tails, and an upper value
    otherwise (tv_interval gives the certified range).
    """
    _check_comparable(law1, law2)
    outcomes = set(law1.support) | set(law2.support)
    l1 = math.fsum(abs(law1.mass(o) - law2.mass(o)) for o in outcomes)
    return 0.5 * l1 + 0.5 * (law1.tail_error + law2.tail_error)


def tv_interval(law1: Law, law2: Law) -> tuple[float, float]:
    """Certified interval for the true TV distance under tail uncertainty."""
    value = exact_tv(law1, law2)
    tails = 0.5 * (law1.tail_error + law2.tail_error)
    return max(0.0, value - 2 * tails), min(1.0, value)


# ---------------------------------------------------------------------------
# coupling identity check

def _indicator_vector(assignment, subsets, r, counts=None):
    counts = counts or Counter(assignment)
    out = []
    for subset in subsets:
        v0 = assignment[subset[0]]
        ok = counts[v0] == r and all(assignment[i] == v0 for i in subset[1:])
        out.append(1 if ok else 0)
    return tuple(out)


def coupling_law_check(inst: Instance, r: int, j, x: int, budget=None) -> float:
    """Max discrepancy between the forced-move coupling law and the
    conditional law it must reproduce.

    Side (a): the law of the strict-tie indicator vector over all r-subsets,
    conditioned on "the players in j all score x and nobody else does",
    by direct enumeration.  Side (b): the law of the coupled indicators,
    obtained by moving the j-players into x, ejecting any other occupant of
    x, and redistributing each ejected score to k != x with probability
    p_k/(1-p_x) -- the redistribution is collapsed analytically, never
    sampled.  Returns max |a - b| over indicator-vector outcomes.

    Truncated geometric supports are renormalized to a proper pmf first:
    the identity is distribution-free, so checking it on the renormalized
    truncation is exact rather than truncation-limited.
    """
    budget = resolve_budget(budget)
    if not 2 <= r <= inst.n:
        raise ValidationError(f"tie order r={r} must satisfy 2 <= r <= n={inst.n}")
    j = tuple(sorted(j))
    if len(j) != r or len(set(j)) != r or any(not 0 <= i < inst.n for i in j):
        raise ValidationError(f"j must be an r-subset of player indices, got {j}")

    values, masses, tail = inst.pmf.support_masses()
    if tail > 1e-15:
        masses = [m / (1.0 - tail) for m in masses]
    mass_of = dict(zip(values, masses))
    if x not in mass_of:
        raise ValidationError(f"box {x} is outside the effective support")
    px = mass_of[x]
    if px >= 1.0:
        raise ValidationError("coupling needs p_x < 1")

    n, S = inst.n, len(values)
    cost = S**n * max(1, (S - 1) ** (n - r))
    if cost > budget:
        raise ResourceBudgetError(cost, budget, "coupling enumeration")

    subsets = list(itertools.combinations(range(n), r))
    others = [v for v in values if v != x]
    other_mass = [mass_of[v] / (1.0 - px) for v in others]
    free = [i for i in range(n) if i not in j]

    ivec_memo: dict = {}

    def ivec(assignment):
        vec = ivec_memo.get(assignment)
        if vec is None:
            vec = _indicator_vector(assignment, subsets, r)
            ivec_memo[assignment] = vec
        return vec

    # side (a): conditional law given I_{jx} = 1
    conditional: dict = {}
    base = [x] * n
    for combo in itertools.product(range(len(others)), repeat=n - r):
        prob = 1.0
        for idx in combo:
            prob *= other_mass[idx]
        for pos, idx in zip(free, combo):
            base[pos] = others[idx]
        vec = ivec(tuple(base))
        conditional[vec] = conditional.get(vec, 0.0) + prob

    # side (b): coupled law over all configurations
    coupled: dict = {}
    for config in itertools.product(values, repeat=n):
        prob = 1.0
        for v in config:
            prob *= mass_of[v]
        in_x = sum(1 for v in config if v == x)
        if in_x == r and all(config[i] == x for i in j):
            vec = ivec(config)  # I_{jx} = 1: do nothing
            coupled[vec] = coupled.get(vec, 0.0) + prob
            continue
        moved = list(config)
        for i in j:
            moved[i] = x
        ejected = [i for i in free if config[i] == x]
        if not ejected:
            vec = ivec(tuple(moved))
            coupled[vec] = coupled.get(vec, 0.0) + prob
            continue
        for combo in itertools.product(range(len(others)), repeat=len(ejected)):
            sub_prob = prob
            for idx in combo:
                sub_prob *= other_mass[idx]
            for pos, idx in zip(ejected, combo):
                moved[pos] = others[idx]
            vec = ivec(tuple(moved))
            coupled[vec] = coupled.get(vec, 0.0) + sub_prob

    outcomes = set(conditional) | set(coupled)
    return max(
        abs(conditional.get(v, 0.0) - coupled.get(v, 0.0)) for v in outcomes
    )
