"""Exact verification of coreset guarantees."""

from __future__ import annotations

import bisect
import math
import statistics
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._grid import Grid, total_order
from .discrepancy import Coloring
from .meter import ErrorMeter
from .mergereduce import MergeReduceParams, merge_reduce
from .model import UncertainPointSet
from .queries import CdfTable, cdf_from_counts, expected_fraction, location_counts
from .ranges import FamilyDescriptor, HalfLine, Range

EXACT_CDF_MAX_N = 64


@dataclass(frozen=True)
class ErrorReport:
    family: str
    re_error: Fraction | None = None
    re_witness: Range | None = None
    rc_error: Fraction | None = None
    rc_witness: tuple | None = None  # (range, tau)
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"family": self.family, **self.detail}
        if self.re_error is not None:
            out["re_error"] = str(self.re_error)
            out["re_error_float"] = float(self.re_error)
            out["re_witness"] = repr(self.re_witness)
        if self.rc_error is not None:
            out["rc_error"] = str(self.rc_error)
            out["rc_error_float"] = float(self.rc_error)
            out["rc_witness"] = {"range": repr(self.rc_witness[0]), "tau": str(self.rc_witness[1])}
        return out


@dataclass(frozen=True)
class QuantizationReport:
    eps_prime: float
    alpha: float
    passed: bool
    ranges_checked: int
    ranges_failed: int
    worst: tuple | None = None  # (range, tau, best achievable gap)

    def as_dict(self) -> dict:
        worst = None
        if self.worst is not None:
            worst = {"range": repr(self.worst[0]), "tau": str(self.worst[1]), "gap": float(self.worst[2])}
        return {
            "eps_prime": self.eps_prime,
            "alpha": self.alpha,
            "passed": self.passed,
            "ranges_checked": self.ranges_checked,
            "ranges_failed": self.ranges_failed,
            "worst": worst,
        }


@dataclass(frozen=True)
class ThresholdGroup:
    i: int
    members: tuple
    w_T: Fraction
    w_P: Fraction | None
    mean: Fraction
    variance: Fraction  # Var[w_T * X_i] with w_T fixed


@dataclass(frozen=True)
class VarianceReport:
    groups: tuple
    variance: Fraction
    group_sum: Fraction
    bound: float
    eps: float
    holds: bool


def check_subset(P: UncertainPointSet, T: UncertainPointSet) -> None:
    if T.k != P.k or T.d != P.d:
        raise ValueError(f"coreset has k={T.k}, d={T.d}; input has k={P.k}, d={P.d}")
    for p in T:
        if p.id not in P:
            raise ValueError(f"coreset point {p.id} is not in the input set")
        if P.point(p.id) != p:
            raise ValueError(f"coreset point {p.id} differs from the input point")


def _rows(P, T):
    check_subset(P, T)
    return np.arange(P.n), np.array([P.row(i) for i in T.ids], dtype=np.int64)


def measure_re_error(
    P: UncertainPointSet, T: UncertainPointSet, f: FamilyDescriptor, budget: int = 100_000, seed: int = 0
) -> ErrorReport:
    a, b = _rows(P, T)
    err, wit = ErrorMeter(P, f, budget=budget, seed=seed).re(a, b)
    return ErrorReport(f.kind, re_error=err, re_witness=wit, detail={"n": P.n, "t_size": T.n})


def measure_rc_error(
    P: UncertainPointSet, T: UncertainPointSet, f: FamilyDescriptor, budget: int = 4_000, seed: int = 0
) -> ErrorReport:
    a, b = _rows(P, T)
    err, wit, tau = ErrorMeter(P, f, rc_budget=budget, seed=seed).rc(a, b)
    return ErrorReport(f.kind, rc_error=err, rc_witness=(wit, tau), detail={"n": P.n, "t_size": T.n})


# -- quantization -----------------------------------------------------------


def _window_gap(u, y, lo: int, hi: int):
    """min over s in [lo, hi] of |y - u[s]| for nondecreasing u."""
    i = bisect.bisect_left(u, y, lo, hi + 1)
    return min(abs(y - u[s]) for s in (i - 1, i) if lo <= s <= hi)


@lru_cache(maxsize=64)
def _windows(n: int, m: int, alpha: Fraction) -> tuple:
    """Extreme F_T index windows for every piece of F_P, as (lo, hi) arrays.

    Row 2c is the window at tau = c/n and row 2c+1 the limit tau -> (c+1)/n.
    """
    a, one = alpha, Fraction(1)
    lo, hi = [], []
    for c in range(n):
        left, right = Fraction(c, n), Fraction(c + 1, n)
        lo.append(min(m, math.floor(m * max(0, left - a))))
        hi.append(math.floor(m * min(one, left + a)))
        x = right - a
        l2 = 0 if x <= 0 else min(m, math.ceil(m * x) - 1)
        x = right + a
        h2 = m if x > 1 else math.ceil(m * x) - 1
        lo.append(l2)
        hi.append(max(l2, h2))
    return np.array(lo, dtype=np.int64), np.array(hi, dtype=np.int64)


def _window_gaps(u: np.ndarray, y: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized ``_window_gap`` for float values."""
    i = np.clip(np.searchsorted(u, y, side="left"), lo, hi + 1)
    below = np.where(i - 1 >= lo, np.abs(y - u[np.maximum(i - 1, 0)]), np.inf)
    above = np.where(i <= hi, np.abs(y - u[np.minimum(i, len(u) - 1)]), np.inf)
    return np.minimum(below, above)


def quantization_gap(FP: CdfTable, FT: CdfTable, alpha) -> tuple:
    """sup over tau in [0, 1] of min over gamma of |F_P(tau) - F_T(gamma)|.

    gamma ranges over [tau - alpha, tau + alpha] clipped to [0, 1]. On a
    piece [c/n, (c+1)/n) of F_P the reachable steps of F_T form an index
    window that slides right as tau grows, and for a monotone sequence the
    distance to a fixed value is worst at the two extreme windows: at
    tau = c/n and in the limit tau -> (c+1)/n. Returns (gap, tau).
    """
    n, m = FP.n, FT.n
    # a float alpha means its decimal text: 0.1 is 1/10
    a = Fraction(repr(alpha)) if isinstance(alpha, float) else Fraction(alpha)
    lo, hi = _windows(n, m, a)
    if isinstance(FP.values[0], Fraction) or isinstance(FT.values[0], Fraction):
        u = list(FT.values)
        worst, where = -1, None
        for c in range(n):
            y = FP.values[c]
            gap = max(_window_gap(u, y, int(lo[2 * c]), int(hi[2 * c])),
                      _window_gap(u, y, int(lo[2 * c + 1]), int(hi[2 * c + 1])))
            if gap > worst:
                worst, where = gap, Fraction(c, n)
        return worst, where
    u = np.asarray(FT.values, dtype=float)
    y = np.repeat(np.asarray(FP.values[:n], dtype=float), 2)
    gaps = _window_gaps(u, y, lo, hi).reshape(n, 2).max(axis=1)
    c = int(np.argmax(gaps))
    return float(gaps[c]), Fraction(c, n)


def _rank_ranges(meter: ErrorMeter, budget: int, seed: int):
    """(lo, hi) rank bounds, per axis [lo, hi), for the quantization cover."""
    g = meter.grid
    if meter.kind == "halfline":
        V = g.size(0)
        hi = np.arange(V + 1)
        return np.zeros((V + 1, 1), dtype=np.int64), hi[:, None]
    if meter.kind == "interval":
        V = g.size(0)
        i, j = np.triu_indices(V + 1, k=1)
        if len(i) > budget:
            pick = np.random.default_rng(seed).choice(len(i), size=budget, replace=False)
            i, j = i[pick], j[pick]
        return i[:, None], j[:, None]
    return meter.rect_cover(budget)


def quantization_check(
    P: UncertainPointSet,
    T: UncertainPointSet,
    f: FamilyDescriptor,
    eps_prime: float,
    alpha: float,
    exact: bool | None = None,
    budget: int = 20_000,
    seed: int = 0,
    r: Range | None = None,
) -> QuantizationReport:
    """Is F_{T,r} an (eps', alpha)-quantization of F_{P,r} on every cover range?

    With ``r`` given, only that range is checked.
    """
    a_rows, b_rows = _rows(P, T)
    if exact is None:
        exact = P.n <= EXACT_CDF_MAX_N
    if r is not None:
        FP = cdf_from_counts(location_counts(P, r), P.k, exact=exact)
        FT = cdf_from_counts(location_counts(T, r), P.k, exact=exact)
        gap, tau = quantization_gap(FP, FT, alpha)
        ok = gap <= (Fraction(eps_prime) if exact else eps_prime)
        return QuantizationReport(eps_prime, alpha, ok, 1, int(not ok), (r, tau, gap))
    meter = ErrorMeter(P, f, budget=budget, seed=seed)
    lo, hi = _rank_ranges(meter, budget, seed)
    ranks = meter.grid.ranks
    tol = Fraction(eps_prime) if exact else eps_prime
    failed, worst = 0, None
    cache = {}
    for s in range(len(lo)):
        inside = ((ranks >= lo[s]) & (ranks < hi[s])).all(axis=2).sum(axis=1)
        key = (np.bincount(inside[a_rows], minlength=P.k + 1).tobytes(),
               np.bincount(inside[b_rows], minlength=P.k + 1).tobytes())
        if key not in cache:
            FP = cdf_from_counts(inside[a_rows].tolist(), P.k, exact=exact)
            FT = cdf_from_counts(inside[b_rows].tolist(), P.k, exact=exact)
            cache[key] = quantization_gap(FP, FT, alpha)
        gap, tau = cache[key]
        if gap > tol:
            failed += 1
        if worst is None or gap > worst[2]:
            r = meter._rect(lo[s], hi[s]) if meter.kind == "rect" else _range_1d(meter, lo[s], hi[s])
            worst = (r, tau, gap)
    return QuantizationReport(eps_prime, alpha, failed == 0, len(lo), failed, worst)


def _range_1d(meter: ErrorMeter, lo, hi):
    if meter.kind == "halfline":
        return HalfLine(meter.grid.cut_below(0, int(hi[0])))
    return meter._interval(int(lo[0]), int(hi[0]) - 1)


# -- variance -----------------------------------------------------------------


def variance_report(
    T: UncertainPointSet, r: Range, eps_rc, P: UncertainPointSet | None = None
) -> VarianceReport:
    """Exact Var over transversals of |S ∩ r| / |S|, by threshold group."""
    k, m = T.k, T.n
    counts = location_counts(T, r)
    p_counts = location_counts(P, r) if P is not None else None
    groups = []
    for i in range(k + 1):
        members = tuple(p.id for p, c in zip(T, counts) if c == i)
        q = Fraction(i, k)
        w_T = Fraction(len(members), m)
        w_P = Fraction(sum(1 for c in p_counts if c == i), P.n) if P is not None else None
        var = len(members) * q * (1 - q) / m**2
        groups.append(ThresholdGroup(i, members, w_T, w_P, q, var))
    variance = sum((Fraction(c, k) * (1 - Fraction(c, k)) for c in counts), Fraction(0)) / m**2
    group_sum = sum((g.variance for g in groups), Fraction(0))
    eps = float(eps_rc)
    bound = 1 / (4 * m) + 3 * eps + 2 * k * eps**2
    return VarianceReport(tuple(groups), variance, group_sum, bound, eps, float(variance) <= bound)


# -- zero bias ------------------------------------------------------------------


@dataclass(frozen=True)
class BiasReport:
    mean: float
    stderr: float
    trials: int
    range: Range
    passed: bool


def median_halfline(P: UncertainPointSet) -> HalfLine:
    locs = sorted(loc[0] for p in P for loc in p.locations)
    return HalfLine(locs[(len(locs) - 1) // 2])


def _prefix_colorer(grid: Grid):
    """Biased control: +1 on the half of the points with the smallest first location."""

    def colorer(rows, seed):
        ids = grid.ids[rows]
        order = total_order(grid.ranks[rows, 0, 0], ids)
        signs = np.full(len(rows), -1)
        signs[order[: (len(rows) + 1) // 2]] = 1
        return Coloring(tuple(ids.tolist()), tuple(signs.tolist()), 0)

    return colorer


def zero_bias_check(
    P: UncertainPointSet,
    f: FamilyDescriptor,
    eps: float,
    mrp: MergeReduceParams,
    trials: int = 500,
    adversarial: bool = False,
    r: Range | None = None,
) -> BiasReport:
    """Mean signed RE error over independent seeds against the 3-sigma rule.

    With ``adversarial`` the colorer is a fixed prefix split and the +1 side
    is always kept, which must be detected as biased.
    """
    from .coresets import _canonical_colorer

    if trials < 100:
        raise ValueError("zero-bias check needs at least 100 trials")
    if P.d != 1:
        raise ValueError("zero-bias check uses a one-dimensional median half-line")
    r = r or median_halfline(P)
    grid = Grid(P)
    mrp = mrp.with_defaults(math.sqrt(P.k), 1.0)
    meter = ErrorMeter(P, f, budget=mrp.verify_budget, grid=grid)
    e_P = expected_fraction(P, r)
    errors = []
    for trial in range(trials):
        params = replace(mrp, seed=mrp.seed + trial)
        colorer = _prefix_colorer(grid) if adversarial else _canonical_colorer(grid, params, False)
        art = merge_reduce(P, f, eps, params, colorer, keep="plus" if adversarial else "random", meter=meter)
        errors.append(float(e_P - expected_fraction(art.T, r)))
    mean = statistics.fmean(errors)
    stderr = statistics.stdev(errors) / math.sqrt(trials)
    passed = abs(mean) <= 3 * stderr if stderr > 0 else mean == 0
    return BiasReport(mean, stderr, trials, r, passed)


__all__ = [
    "BiasReport",
    "ErrorReport",
    "QuantizationReport",
    "ThresholdGroup",
    "VarianceReport",
    "measure_rc_error",
    "measure_re_error",
    "quantization_check",
    "quantization_gap",
    "variance_report",
    "zero_bias_check",
]
