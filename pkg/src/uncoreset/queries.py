"""Exact evaluators for expected-value, threshold-count and CDF queries."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .model import UncertainPointSet
from .ranges import Range

BRUTE_FORCE_LIMIT = 10**6


def location_counts(P: UncertainPointSet, r: Range) -> list[int]:
    """Number of locations of each point inside r."""
    return [sum(1 for loc in p.locations if r.contains(loc)) for p in P]


def expected_fraction(P: UncertainPointSet, r: Range) -> Fraction:
    return Fraction(sum(location_counts(P, r)), P.n * P.k)


def rc_fraction(P: UncertainPointSet, r: Range, tau) -> Fraction:
    tau = Fraction(tau)
    if not 0 < tau <= 1:
        raise ValueError(f"threshold {tau} outside (0, 1]")
    hits = sum(1 for c in location_counts(P, r) if Fraction(c, P.k) >= tau)
    return Fraction(hits, P.n)


@dataclass(frozen=True)
class CdfTable:
    """Right-continuous step CDF of |Q ∩ r| / n with jumps at c/n."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values) or not self.values:
            raise ValueError("breakpoints and values must be non-empty and aligned")
        if any(b > a for a, b in zip(self.values[1:], self.values)):
            raise ValueError("CDF values must be nondecreasing")

    @property
    def n(self) -> int:
        return len(self.breakpoints) - 1

    def __call__(self, tau):
        if isinstance(tau, float) and isinstance(self.breakpoints[0], Fraction):
            # 0.6 means 3/5 here, not the binary float just below it
            tau = Fraction(repr(tau))
        i = bisect.bisect_right(self.breakpoints, tau) - 1
        return 0 if i < 0 else self.values[i]

    def pmf(self) -> list:
        return [self.values[0]] + [b - a for a, b in zip(self.values, self.values[1:])]


def _binomial_weights(m: int, c: int, k: int) -> list[int]:
    """Integer weights of (k - c + c x)^m."""
    return [math.comb(m, i) * c**i * (k - c) ** (m - i) for i in range(m + 1)]


def _convolve(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poisson_binomial_weights(counts: Sequence[int], k: int) -> list[int]:
    """Exact distribution of sum of Bernoulli(c_i / k), scaled by k^n.

    Points sharing the same success count form one binomial factor, so the
    work is a product of at most k+1 polynomials.
    """
    mult = np.bincount(np.asarray(counts, dtype=np.int64), minlength=k + 1)
    weights = [1]
    for c, m in enumerate(mult.tolist()):
        if m:
            weights = _convolve(weights, _binomial_weights(m, c, k))
    return weights


def poisson_binomial_pmf(counts: Sequence[int], k: int) -> np.ndarray:
    """Floating-point version of the same distribution, for large n."""
    mult = np.bincount(np.asarray(counts, dtype=np.int64), minlength=k + 1)
    pmf = np.ones(1)
    for c, m in enumerate(mult.tolist()):
        if m:
            pmf = np.convolve(pmf, binom.pmf(np.arange(m + 1), m, c / k))
    return pmf


def cdf_from_counts(counts: Sequence[int], k: int, exact: bool = True) -> CdfTable:
    n = len(counts)
    if exact:
        total = k**n
        acc, values = 0, []
        for w in poisson_binomial_weights(counts, k):
            acc += w
            values.append(Fraction(acc, total))
        breakpoints = tuple(Fraction(c, n) for c in range(n + 1))
        return CdfTable(breakpoints, tuple(values))
    values = np.minimum(np.cumsum(poisson_binomial_pmf(counts, k)), 1.0)
    values[-1] = 1.0
    return CdfTable(tuple(c / n for c in range(n + 1)), tuple(np.maximum.accumulate(values).tolist()))


def rq_cdf(P: UncertainPointSet, r: Range, exact: bool = True) -> CdfTable:
    """CDF of the fraction of a random transversal inside r."""
    return cdf_from_counts(location_counts(P, r), P.k, exact=exact)


def brute_force_cdf(P: UncertainPointSet, r: Range) -> CdfTable:
    """Oracle: enumerate all k^n transversals, each with weight k^-n."""
    n, k = P.n, P.k
    if k**n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"k^n = {k}^{n} exceeds the enumeration limit {BRUTE_FORCE_LIMIT}")
    inside = np.array(
        [[r.contains(loc) for loc in p.locations] for p in P], dtype=np.int64
    )
    # in_r count of every transversal, one array axis per point
    totals = np.zeros((1,) * n, dtype=np.int64)
    for i in range(n):
        shape = [1] * n
        shape[i] = k
        totals = totals + inside[i].reshape(shape)
    freq = np.bincount(totals.ravel(), minlength=n + 1)
    cum = np.cumsum(freq).tolist()
    return CdfTable(
        tuple(Fraction(c, n) for c in range(n + 1)),
        tuple(Fraction(v, k**n) for v in cum),
    )
