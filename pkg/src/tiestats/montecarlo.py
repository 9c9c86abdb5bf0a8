"""Seeded simulation of the tie statistics on instances of any size.

Replications are generated in fixed-size chunks, each chunk seeded by
(seed, chunk_index) through a SeedSequence, so results are bitwise
reproducible and independent of how many worker streams a caller splits the
chunks across.  Tallies are integer counts merged commutatively.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .distributions import DiscretePMF, Instance
from .errors import ValidationError
from .exact_oracle import Law, exact_tv

_CHUNK = 16384  # fixed chunking is part of the determinism contract
_SEED_MASK = 0xFFFFFFFFFFFFFFFF


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & _SEED_MASK, chunk_index]))


def sample_scores(rng: np.random.Generator, pmf: DiscretePMF, m: int, n: int) -> np.ndarray:
    """(m, n) array of i.i.d. scores from pmf.

    Geometric scores use the exact inverse transform
    X = 1 + floor(log(U)/log(1-p)) with U uniform on (0, 1], so the full
    infinite support is reachable (no truncation during sampling).
    """
    if pmf.kind == "uniform":
        return rng.integers(1, pmf.N + 1, size=(m, n), dtype=np.int64)
    if pmf.kind == "geometric":
        u = 1.0 - rng.random((m, n))
        return (1.0 + np.floor(np.log(u) / math.log1p(-pmf.p))).astype(np.int64)
    values = np.array([v for v, _ in pmf.probabilities], dtype=np.int64)
    masses = np.array([mass for _, mass in pmf.probabilities], dtype=float)
    idx = rng.choice(len(values), size=(m, n), p=masses / masses.sum())
    return values[idx]


def _row_statistics(scores: np.ndarray, statistic: str, r=None, A=None, B=None):
    """Per-row W, Y_r, or (Y_A..Y_B) from an (m, n) score array."""
    s = np.sort(scores, axis=1)
    m, n = s.shape
    eq = s[:, 1:] == s[:, :-1]
    if statistic == "W":
        # each element contributes its count of preceding equals in its run,
        # which sums to C(c, 2) per value
        run = np.zeros(m, dtype=np.int64)
        w = np.zeros(m, dtype=np.int64)
        for k in range(n - 1):
            run = (run + 1) * eq[:, k]
            w += run
        return w
    orders = [r] if statistic == "Y" else list(range(A, B + 1))
    tallies = {a: np.zeros(m, dtype=np.int64) for a in orders}
    cur = np.ones(m, dtype=np.int64)
    for k in range(n):
        if k > 0:
            cur = np.where(eq[:, k - 1], cur + 1, 1)
        end = ~eq[:, k] if k < n - 1 else np.ones(m, dtype=bool)
        for a in orders:
            tallies[a] += end & (cur == a)
    if statistic == "Y":
        return tallies[r]
    return np.stack([tallies[a] for a in orders], axis=1)


@dataclass(frozen=True)
class SimConfig:
    """What to simulate: instance, statistic, replication count, seeding."""

    instance: Instance
    statistic: str
    replications: int
    seed: int
    stream_count: int = 1
    r: int = 0
    A: int = 0
    B: int = 0

    def __post_init__(self):
        if self.statistic not in ("W", "Y", "Z"):
            raise ValidationError(f"statistic must be W, Y or Z, got {self.statistic!r}")
        if self.replications < 1:
            raise ValidationError("replications must be >= 1")
        if self.stream_count < 1:
            raise ValidationError("stream_count must be >= 1")
        n = self.instance.n
        if self.statistic == "Y" and not 2 <= self.r <= n:
            raise ValidationError(f"Y statistic needs 2 <= r <= n, got r={self.r}")
        if self.statistic == "Z" and not 2 <= self.A <= self.B <= n:
            raise ValidationError(
                f"Z statistic needs 2 <= A <= B <= n, got ({self.A}, {self.B})"
            )


@dataclass
class SimResult:
    """Empirical law plus moment summaries of one simulation run."""

    empirical_law: Law
    replications: int
    statistic_mean: object
    statistic_variance: object
    std_error_mean: object

    def to_json_dict(self) -> dict:
        out = self.empirical_law.to_json_dict()
        out["replications"] = self.replications
        for key, value in (
            ("mean", self.statistic_mean),
            ("variance", self.statistic_variance),
            ("std_error", self.std_error_mean),
        ):
            out[key] = list(value) if isinstance(value, tuple) else value
        return out


def run(config: SimConfig) -> SimResult:
    """Simulate the configured statistic; deterministic given the config.

    The output does not depend on stream_count: chunks are seeded by
    (seed, chunk_index) and merged by commutative integer tallies, so any
    parallel split over chunks reproduces the sequential result bit for bit.
    """
    reps = config.replications
    inst = config.instance
    counter: Counter = Counter()
    done = 0
    chunk_index = 0
    while done < reps:
        m = min(_CHUNK, reps - done)
        rng = _chunk_rng(config.seed, chunk_index)
        scores = sample_scores(rng, inst.pmf, m, inst.n)
        values = _row_statistics(scores, config.statistic, config.r, config.A, config.B)
        if config.statistic == "Z":
            counter.update(map(tuple, values.tolist()))
        else:
            counter.update(values.tolist())
        done += m
        chunk_index += 1

    law = Law({o: c / reps for o, c in counter.items()}, 0.0)
    if config.statistic == "Z":
        d = config.B - config.A + 1
        means = []
        variances = []
        for i in range(d):
            mu = sum(o[i] * c for o, c in counter.items()) / reps
            var = sum(o[i] ** 2 * c for o, c in counter.items()) / reps - mu * mu
            means.append(mu)
            variances.append(var)
        return SimResult(
            law,
            reps,
            tuple(means),
            tuple(variances),
            tuple(math.sqrt(max(v, 0.0) / reps) for v in variances),
        )
    mu = sum(o * c for o, c in counter.items()) / reps
    var = sum(o * o * c for o, c in counter.items()) / reps - mu * mu
    return SimResult(law, reps, mu, var, math.sqrt(max(var, 0.0) / reps))


def empirical_tv(
    result: SimResult,
    reference: Law,
    resamples: int = 200,
    seed: int = 2026,
) -> tuple[float, float]:
    """Plug-in TV between the empirical law and a reference, with bootstrap SE.

    The plug-in estimate is upward-biased by O(sqrt(support/replications));
    callers comparing against upper bounds can live with that.  The bootstrap
    resamples the empirical counts multinomially (default 200 resamples).
    """
    emp = result.empirical_law
    estimate = exact_tv(emp, reference)
    outcomes = sorted(emp.support)
    probs = np.array([emp.support[o] for o in outcomes])
    ref_on = np.array([reference.mass(o) for o in outcomes])
    ref_off = math.fsum(
        m for o, m in reference.support.items() if o not in emp.support
    )
    rng = np.random.default_rng(np.random.SeedSequence([seed & _SEED_MASK, 0xB007]))
    sampled = rng.multinomial(result.replications, probs / probs.sum(), size=resamples)
    tvs = 0.5 * (
        np.abs(sampled / result.replications - ref_on).sum(axis=1)
        + ref_off
        + reference.tail_error
    )
    return estimate, float(tvs.std(ddof=1)) if resamples > 1 else (estimate, 0.0)
