"""Balanced colorings of permutation systems and their discrepancy."""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .model import UncertainPointSet, certify
from .permutations import IntervalRef, PermutationSystem
from .queries import location_counts
from .ranges import FamilyDescriptor, canonical_ranges

EXHAUSTIVE_LIMIT = 20


class DiscrepancyTargetWarning(UserWarning):
    """A coloring missed its configured discrepancy target."""


@dataclass(frozen=True)
class Coloring:
    """Signs over a ground set of point ids, aligned with ``ids``."""

    ids: tuple
    signs: tuple
    disc: int | None = None
    target: float | None = None
    per_group: tuple = field(default=())

    def __post_init__(self):
        ids = tuple(int(i) for i in self.ids)
        signs = tuple(int(s) for s in self.signs)
        if len(ids) != len(signs):
            raise ValueError("ids and signs differ in length")
        if len(set(ids)) != len(ids):
            raise ValueError("coloring lists a point id twice")
        if any(s not in (-1, 1) for s in signs):
            raise ValueError("signs must be -1 or +1")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_mapping(cls, sign: Mapping[int, int]) -> Coloring:
        return cls(tuple(sign), tuple(sign.values()))

    def sign(self, pid: int) -> int:
        return self.as_dict()[pid]

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.signs))

    @property
    def is_balanced(self) -> bool:
        return abs(sum(self.signs)) <= 1

    @property
    def target_met(self) -> bool:
        return self.target is None or self.disc is None or self.disc <= self.target

    def side(self, s: int) -> list[int]:
        return [i for i, x in zip(self.ids, self.signs) if x == s]

    def array_for(self, ids: Sequence[int]) -> np.ndarray:
        m = self.as_dict()
        try:
            return np.array([m[int(i)] for i in ids], dtype=np.int64)
        except KeyError as e:
            raise ValueError(f"coloring does not cover point {e.args[0]}") from None


@dataclass(frozen=True)
class DiscReport:
    max_abs: int
    argmax: IntervalRef
    per_perm: tuple


def eval_disc(sys: PermutationSystem, chi: Coloring) -> DiscReport:
    """Exact max |sum of signs| over all contiguous runs of all permutations."""
    if set(chi.ids) != set(sys.ids.tolist()):
        raise ValueError("coloring and permutation system cover different ids")
    signs = chi.array_for(sys.ids)
    per, best, arg = [], -1, None
    for j, perm in enumerate(sys.perms):
        s = np.concatenate([[0], np.cumsum(signs[perm])])
        hi, lo = int(np.argmax(s)), int(np.argmin(s))
        v = int(s[hi] - s[lo])
        per.append(v)
        if v > best:
            best, arg = v, IntervalRef(j, min(hi, lo), max(hi, lo))
    return DiscReport(best, arg, tuple(per))


def disc_target(ell: int, n: int, c_disc: float = 4.0) -> float:
    return c_disc * math.sqrt(ell) * (1 + math.log2(max(n, 1)))


def _pair_start(sys: PermutationSystem, rng: np.random.Generator) -> np.ndarray:
    """Alternate signs along a random permutation, random sign per pair."""
    n = sys.n
    perm = sys.perms[int(rng.integers(sys.ell))]
    _, first = np.unique(perm, return_index=True)
    seen = perm[np.sort(first)]
    order = np.concatenate([seen, np.setdiff1d(np.arange(n), seen)])
    signs = np.empty(n, dtype=np.int64)
    flips = rng.choice([-1, 1], size=(n + 1) // 2)
    for p in range(n // 2):
        signs[order[2 * p]] = flips[p]
        signs[order[2 * p + 1]] = -flips[p]
    if n % 2:
        signs[order[-1]] = flips[-1]
    return signs


def _search(flat, offsets, n, starts, budget, mode, floor, threads):
    """Run one local search per start and keep the best (ties: first start)."""
    iters = budget if budget is not None else 20 * n + 2000
    patience = max(4 * n, 2000)

    def run(args):
        seed, s0 = args
        return _kernels.local_search(flat, offsets, s0, iters, patience, seed, 1.0, mode, floor)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(a) for a in starts]
    best = min(range(len(results)), key=lambda i: (results[i][1], i))
    return results[best]


def _per_group(flat, offsets, signs, groups, mode):
    out = np.zeros(len(offsets) - 1, dtype=np.int64)
    _kernels.seq_discs(flat, offsets, signs, mode, out)
    return tuple(int(out[groups == g].max()) for g in np.unique(groups))


def find_coloring(
    sys: PermutationSystem,
    budget: int | None = None,
    seed: int = 0,
    c_disc: float = 4.0,
    restarts: int = 2,
    threads: int = 1,
) -> Coloring:
    """Balanced low-discrepancy coloring by randomized swap local search.

    Deterministic given ``seed``; restarts may run on ``threads`` threads
    without changing the result. Warns when the target
    c_disc * sqrt(ell) * (1 + log2 n) is not met.
    """
    rng = np.random.default_rng(seed)
    flat, offsets = sys.flat()
    starts = [
        (int(rng.integers(2**31 - 1)), _pair_start(sys, rng)) for _ in range(max(1, restarts))
    ]
    signs, disc = _search(flat, offsets, sys.n, starts, budget, _kernels.PREFIX, 1, threads)
    target = disc_target(sys.ell, sys.n, c_disc)
    chi = Coloring(
        tuple(sys.ids.tolist()),
        tuple(signs.tolist()),
        int(disc),
        target,
        _per_group(flat, offsets, signs, sys.groups, _kernels.PREFIX),
    )
    if not chi.target_met:
        warnings.warn(
            f"coloring discrepancy {disc} exceeds target {target:.1f} (n={sys.n}, ell={sys.ell})",
            DiscrepancyTargetWarning,
            stacklevel=2,
        )
    return chi


def find_incidence_coloring(
    ids: Sequence[int],
    sets: Sequence[np.ndarray],
    groups: Sequence[int] | None = None,
    budget: int | None = None,
    seed: int = 0,
    restarts: int = 2,
    threads: int = 1,
) -> Coloring:
    """Balanced coloring minimizing max |sum| over explicit sets of ground indices."""
    n = len(ids)
    sets = [np.asarray(s, dtype=np.int64) for s in sets] or [np.arange(n)]
    offsets = np.zeros(len(sets) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(s) for s in sets])
    flat = np.concatenate(sets)
    rng = np.random.default_rng(seed)
    starts = []
    for _ in range(max(1, restarts)):
        s0 = np.ones(n, dtype=np.int64)
        s0[rng.permutation(n)[: n // 2]] = -1
        if n % 2 and rng.random() < 0.5:
            s0 = -s0
        starts.append((int(rng.integers(2**31 - 1)), s0))
    floor = int(any(len(s) % 2 for s in sets))
    signs, disc = _search(flat, offsets, n, starts, budget, _kernels.SETS, floor, threads)
    groups = np.zeros(len(sets), dtype=np.int64) if groups is None else np.asarray(groups)
    return Coloring(
        tuple(int(i) for i in ids),
        tuple(signs.tolist()),
        int(disc),
        None,
        _per_group(flat, offsets, signs, groups, _kernels.SETS),
    )


def exhaustive_coloring(sys: PermutationSystem) -> tuple[Coloring, int]:
    """Minimum-discrepancy balanced coloring by full enumeration (n <= 20)."""
    n = sys.n
    if n > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive search is limited to n <= {EXHAUSTIVE_LIMIT}, got {n}")
    # a global sign flip keeps the discrepancy, so ceil(n/2) plus signs suffice
    combos = np.array(list(itertools.combinations(range(n), (n + 1) // 2)), dtype=np.int64)
    signs = -np.ones((len(combos), n), dtype=np.int64)
    signs[np.arange(len(combos))[:, None], combos] = 1
    worst = np.zeros(len(combos), dtype=np.int64)
    for perm in sys.perms:
        s = np.cumsum(signs[:, perm], axis=1)
        disc = np.maximum(s.max(axis=1), 0) - np.minimum(s.min(axis=1), 0)
        np.maximum(worst, disc, out=worst)
    best = int(np.argmin(worst))
    chi = Coloring(tuple(sys.ids.tolist()), tuple(signs[best].tolist()), int(worst[best]))
    return chi, int(worst[best])


def re_disc(
    P: UncertainPointSet,
    f: FamilyDescriptor,
    chi: Coloring,
    require_balanced: bool = False,
    budget: int | None = 100_000,
) -> Fraction:
    """max over canonical ranges of n * |E_r(P+) - E_r(P)|."""
    if require_balanced and not (P.n % 2 == 0 and sum(chi.signs) == 0):
        raise ValueError("an exactly balanced coloring (|P+| = n/2) is required")
    signs = chi.array_for(P.ids)
    plus = signs > 0
    n_plus = int(plus.sum())
    if n_plus == 0:
        raise ValueError("coloring has no +1 points")
    best = Fraction(0)
    for r in canonical_ranges(certify(P), f, budget=budget):
        c = np.array(location_counts(P, r), dtype=np.int64)
        e_all = Fraction(int(c.sum()), P.n * P.k)
        e_plus = Fraction(int(c[plus].sum()), n_plus * P.k)
        best = max(best, P.n * abs(e_plus - e_all))
    return best


def certified_disc(
    P: UncertainPointSet, f: FamilyDescriptor, chi: Coloring, budget: int | None = 100_000
) -> Fraction:
    """(1/k) max over canonical ranges of |sum of chi over P_cert in r|."""
    signs = chi.array_for(P.ids)
    best = 0
    for r in canonical_ranges(certify(P), f, budget=budget):
        best = max(best, abs(int(np.dot(location_counts(P, r), signs))))
    return Fraction(best, P.k)
