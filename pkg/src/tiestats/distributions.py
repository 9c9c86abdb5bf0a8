"""Score distributions and the tie-probability primitives built on them.

Everything downstream (exact laws, Poisson references, error bounds, the
coin game, simulation) consumes the quantities defined here: the collision
probability sum_x p_x^k, the strict r-way tie probability
pi = sum_x p_x^r (1-p_x)^(n-r), and the tie-count means lambda = C(n,r)*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError

_MASS_TOL = 1e-12


@dataclass(frozen=True)
class DiscretePMF:
    """A discrete score distribution on positive integers.

    Three kinds are supported:

    * ``explicit`` -- a finite list of (value, mass) pairs;
    * ``uniform`` -- uniform on {1, ..., N}, represented implicitly so that
      bound evaluation stays O(1) even for N in the millions;
    * ``geometric`` -- P(X = x) = (1-p)^(x-1) p on {1, 2, ...}, with an
      explicit truncation point for series/enumeration paths chosen so the
      omitted tail mass (1-p)^x_max is at most ``tail_tolerance``.
    """

    kind: str
    probabilities: tuple[tuple[int, float], ...] = field(default=())
    N: int = 0
    p: float = 0.0
    tail_tolerance: float = 1e-12

    def __post_init__(self):
        if self.kind == "explicit":
            if not self.probabilities:
                raise ValidationError("explicit pmf needs at least one (value, mass) pair")
            values = [v for v, _ in self.probabilities]
            masses = [m for _, m in self.probabilities]
            if any(v <= 0 or v != int(v) for v in values):
                raise ValidationError("explicit pmf values must be positive integers")
            if any(v2 <= v1 for v1, v2 in zip(values, values[1:])):
                raise ValidationError("explicit pmf values must be strictly increasing")
            if any(m < 0 for m in masses):
                raise ValidationError("explicit pmf masses must be nonnegative")
            if abs(sum(masses) - 1.0) > _MASS_TOL:
                raise ValidationError(f"explicit pmf masses sum to {sum(masses)}, not 1")
        elif self.kind == "uniform":
            if self.N < 1:
                raise ValidationError("uniform pmf needs N >= 1")
        elif self.kind == "geometric":
            if not 0.0 < self.p < 1.0:
                raise ValidationError("geometric pmf needs p in (0, 1)")
            if self.tail_tolerance <= 0:
                raise ValidationError("tail_tolerance must be positive")
        else:
            raise ValidationError(f"unknown pmf kind {self.kind!r}")

    @classmethod
    def uniform(cls, N: int) -> "DiscretePMF":
        return cls(kind="uniform", N=int(N))

    @classmethod
    def geometric(cls, p: float, tail_tolerance: float = 1e-12) -> "DiscretePMF":
        return cls(kind="geometric", p=float(p), tail_tolerance=float(tail_tolerance))

    @classmethod
    def explicit(cls, pairs) -> "DiscretePMF":
        return cls(kind="explicit", probabilities=tuple((int(v), float(m)) for v, m in pairs))

    @property
    def x_max(self) -> int:
        """Truncation point of the geometric support: least x with (1-p)^x <= tail_tolerance."""
        if self.kind != "geometric":
            raise ValidationError("x_max is defined for geometric pmfs only")
        return max(1, math.ceil(math.log(self.tail_tolerance) / math.log1p(-self.p)))

    def mass(self, value: int) -> float:
        if self.kind == "uniform":
            return 1.0 / self.N if 1 <= value <= self.N else 0.0
        if self.kind == "geometric":
            return (1.0 - self.p) ** (value - 1) * self.p if value >= 1 else 0.0
        for v, m in self.probabilities:
            if v == value:
                return m
        return 0.0

    def support_masses(self) -> tuple[list[int], list[float], float]:
        """Finite effective support as (values, masses, unaccounted tail mass).

        Uniform and explicit kinds are exact (tail 0 up to rounding);
        the geometric kind truncates at x_max with tail (1-p)^x_max.
        Callers that enumerate must account for the tail explicitly.
        """
        if self.kind == "uniform":
            return list(range(1, self.N + 1)), [1.0 / self.N] * self.N, 0.0
        if self.kind == "explicit":
            values = [v for v, _ in self.probabilities]
            masses = [m for _, m in self.probabilities]
            return values, masses, max(0.0, 1.0 - sum(masses))
        xm = self.x_max
        q = 1.0 - self.p
        masses = [q ** (x - 1) * self.p for x in range(1, xm + 1)]
        return list(range(1, xm + 1)), masses, q ** xm


@dataclass(frozen=True)
class Instance:
    """n i.i.d. players/balls with a common score distribution."""

    n: int
    pmf: DiscretePMF

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError(f"an instance needs n >= 2 players, got {self.n}")


def _check_order(inst: Instance, r: int) -> None:
    if not 2 <= r <= inst.n:
        raise ValidationError(f"tie order r={r} must satisfy 2 <= r <= n={inst.n}")


def collision_probability(pmf: DiscretePMF, k: int) -> float:
    """P(X_1 = X_2 = ... = X_k) = sum_x p_x^k for k i.i.d. scores.

    k=2 is the pairwise collision probability, k=3 the three-way one.
    Uniform and geometric kinds use closed forms (no truncation error):
    N^(1-k) and p^k / (1 - (1-p)^k) respectively.
    """
    if k < 2:
        raise ValidationError(f"collision order k={k} must be >= 2")
    if pmf.kind == "uniform":
        return float(pmf.N) ** (1 - k)
    if pmf.kind == "geometric":
        # 1 - (1-p)^k via expm1 keeps full precision for small p
        return pmf.p**k / -math.expm1(k * math.log1p(-pmf.p))
    return sum(m**k for _, m in pmf.probabilities)


def strict_tie_probability(inst: Instance, r: int) -> float:
    """Probability that r designated players strictly tie: sum_x p_x^r (1-p_x)^(n-r).

    "Strict" means the shared value is hit by exactly those r players.  The
    uniform case is the closed form N^(1-r) (1-1/N)^(n-r); the geometric case
    is a series truncated at x_max, with strict_tie_tail_bound() giving the
    omitted-tail bound to report alongside.
    """
    _check_order(inst, r)
    n, pmf = inst.n, inst.pmf
    if pmf.kind == "uniform":
        N = pmf.N
        if r == n:
            return float(N) ** (1 - r)
        if N == 1:
            return 0.0  # r < n players can never be the only occupants
        return float(N) ** (1 - r) * math.exp((n - r) * math.log1p(-1.0 / N))
    if pmf.kind == "geometric":
        p, q = pmf.p, 1.0 - pmf.p
        total = 0.0
        px = p
        for _ in range(pmf.x_max):
            total += px**r * (1.0 - px) ** (n - r)
            px *= q
        return total
    return sum(m**r * (1.0 - m) ** (n - r) for _, m in pmf.probabilities)


def strict_tie_tail_bound(inst: Instance, r: int) -> float:
    """Upper bound on the series mass dropped by strict_tie_probability.

    Zero for uniform/explicit kinds.  For the geometric kind the omitted
    terms are below sum_{x > x_max} p_x^r, a geometric tail with exact sum
    collision_probability(pmf, r) * (1-p)^(r * x_max).
    """
    _check_order(inst, r)
    pmf = inst.pmf
    if pmf.kind != "geometric":
        return 0.0
    return collision_probability(pmf, r) * (1.0 - pmf.p) ** (r * pmf.x_max)


def geo_pi_bounds(inst: Instance, r: int) -> tuple[float, float]:
    """Closed-form sandwich for the geometric strict-tie probability.

    lower = p^(r-1)/r - 2(n-r) p^r / ((r+1)(2-rp))
    upper = 2 p^(r-1) / (r (2-(r-1)p)) - (n-r) p^r / (r+1)
            + (n-r)^2 p^(r+1) / ((r+2)(2-(r+1)p))

    Both are tight as p -> 0.  Raw formula values are returned: the lower
    bound can go negative for large n, and clamping is the caller's policy.
    """
    _check_order(inst, r)
    if inst.pmf.kind != "geometric":
        raise ValidationError("geo_pi_bounds applies to geometric pmfs only")
    n, p = inst.n, inst.pmf.p
    if r * p >= 2 or (r + 1) * p >= 2:
        raise ValidationError(
            f"sandwich bounds need rp < 2 and (r+1)p < 2; got r={r}, p={p}"
        )
    lower = p ** (r - 1) / r - 2 * (n - r) * p**r / ((r + 1) * (2 - r * p))
    upper = (
        2 * p ** (r - 1) / (r * (2 - (r - 1) * p))
        - (n - r) * p**r / (r + 1)
        + (n - r) ** 2 * p ** (r + 1) / ((r + 2) * (2 - (r + 1) * p))
    )
    return lower, upper


def _comb_times(comb: int, log_rest: float) -> float:
    """comb * exp(log_rest) with exact integer comb, robust to huge combs."""
    if comb.bit_length() <= 900:
        return float(comb) * math.exp(log_rest)
    return math.exp(math.log(comb) + log_rest)


def lambda_r(inst: Instance, r: int) -> float:
    """Expected number of strict r-way ties: C(n,r) * strict_tie_probability."""
    _check_order(inst, r)
    comb = math.comb(inst.n, r)
    pmf = inst.pmf
    if pmf.kind == "uniform" and pmf.N > 1 and r < inst.n:
        # log-space product: C(n,r) can exceed float range for large n
        N, n = pmf.N, inst.n
        return _comb_times(comb, (1 - r) * math.log(N) + (n - r) * math.log1p(-1.0 / N))
    return comb * strict_tie_probability(inst, r)


def lambda_W(inst: Instance) -> float:
    """Expected number of tied pairs: C(n,2) * P(X_1 = X_2)."""
    return math.comb(inst.n, 2) * collision_probability(inst.pmf, 2)


def lambda_asymptotic(N: int, n: int, a: int) -> float:
    """Stirling-form approximation N (ne/(Na))^a / sqrt(2 pi a) to lambda_a.

    Used for regime reasoning only; carries no error guarantee.  Monotone
    decreasing in a when n << N.
    """
    if a < 2:
        raise ValidationError(f"needs a >= 2, got a={a}")
    log_val = (
        math.log(N)
        + a * (math.log(n) + 1.0 - math.log(N) - math.log(a))
        - 0.5 * math.log(2 * math.pi * a)
    )
    return math.exp(log_val)
