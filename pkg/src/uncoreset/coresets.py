"""Coreset constructors: random sampling and discrepancy-based merge-reduce."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._grid import Grid, total_order
from .artifact import CoresetArtifact, RoundRecord  # noqa: F401  (re-exported)
from .discrepancy import find_coloring, find_incidence_coloring
from .lifting import LiftingStats, ranked_boxes
from .mergereduce import MergeReduceParams, coreset_size, merge_reduce
from .meter import ErrorMeter
from .model import UncertainPointSet
from .permutations import PermutationSystem, ranked_level_system, tree_depth
from .ranges import FamilyDescriptor

RC_RECT_MAX_D = 2
RC_RECT_RANGES = 512


class UnsupportedFamilyError(ValueError):
    """The requested family, dimension or kind has no construction."""


@dataclass(frozen=True)
class SampleParams:
    delta: float = 0.1
    c_samp: float = 1.0

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.c_samp <= 0:
            raise ValueError("c_samp must be positive")


@dataclass(frozen=True)
class RqParams:
    eps: float
    eps_prime: float
    alpha: float
    t_size: int

    def __post_init__(self):
        if not 0 < self.eps_prime < 0.5:
            raise ValueError(f"eps' must lie in (0, 1/2), got {self.eps_prime}")
        if self.alpha < rq_alpha(self.eps, self.eps_prime, self.t_size) - 1e-12:
            raise ValueError("alpha is below eps + sqrt(ln(2/eps') / (2|T|))")

    @property
    def valid(self) -> bool:
        """The guarantee is only meaningful for alpha < 1/2."""
        return self.alpha < 0.5


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _sample(P, size, seed, kind, params) -> CoresetArtifact:
    size = min(P.n, size)
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(P.n, size=size, replace=False))
    return CoresetArtifact(P.take(rows), kind, "sample", {**params, "size": size}, seed)


def re_sample_size(eps: float, nu: int, k: int, sp: SampleParams) -> int:
    return math.ceil(sp.c_samp / eps**2 * (nu + math.log(k / sp.delta)))


def rc_sample_size(eps: float, nu: int, sp: SampleParams) -> int:
    return math.ceil(sp.c_samp / eps**2 * (nu + math.log(1 / sp.delta)))


def build_re_sample(
    P: UncertainPointSet, f: FamilyDescriptor, eps: float, sp: SampleParams, seed: int = 0
) -> CoresetArtifact:
    """Uniform sample without replacement of size c(1/eps^2)(nu + ln(k/delta))."""
    _check_eps(eps)
    size = re_sample_size(eps, f.vc_dim, P.k, sp)
    return _sample(P, size, seed, "re", {"eps": eps, "delta": sp.delta, "c_samp": sp.c_samp})


def build_rc_sample(
    P: UncertainPointSet, f: FamilyDescriptor, eps: float, sp: SampleParams, seed: int = 0
) -> CoresetArtifact:
    """Uniform sample without replacement of size c(1/eps^2)(nu + ln(1/delta))."""
    _check_eps(eps)
    size = rc_sample_size(eps, f.vc_dim, sp)
    return _sample(P, size, seed, "rc", {"eps": eps, "delta": sp.delta, "c_samp": sp.c_samp})


# -- colorers: rows of P -> balanced coloring over their ids ----------------


def _color(sys: PermutationSystem, seed: int, mrp: MergeReduceParams):
    return find_coloring(
        sys, budget=mrp.coloring_budget, seed=seed, c_disc=mrp.c_disc, restarts=mrp.restarts
    )


def _canonical_colorer(grid: Grid, mrp: MergeReduceParams, sorted_locations: bool):
    ranks = grid.sorted_ranks if sorted_locations else grid.ranks[:, :, 0]

    def colorer(rows, seed):
        ids = grid.ids[rows]
        perms = [total_order(ranks[rows, j], ids) for j in range(grid.k)]
        return _color(PermutationSystem(ids, perms, list(range(1, grid.k + 1))), seed, mrp)

    return colorer


def _traversal_level_colorer(grid: Grid, mrp: MergeReduceParams):
    """Level permutations of each canonical traversal, stacked."""

    def colorer(rows, seed):
        ids = grid.ids[rows]
        owners = np.arange(len(rows))
        systems = [
            ranked_level_system(grid.ranks[rows, j, :], owners, ids, group=j + 1)
            for j in range(grid.k)
        ]
        sys = PermutationSystem(
            ids,
            [p for s in systems for p in s.perms],
            [lab for s in systems for lab in s.labels],
            np.concatenate([s.groups for s in systems]),
        )
        return _color(sys, seed, mrp)

    return colorer


def lifted_windows(s: np.ndarray, t: int, top: int) -> tuple[np.ndarray, np.ndarray]:
    """Lifted 3D points of sorted rank rows s (m, k) for threshold t.

    Returns coordinates (m * (k-t+1), 3) and owning row positions.
    """
    m, k = s.shape
    nxt = np.concatenate([s[:, 1:], np.full((m, 1), top)], axis=1)
    coords, owners = [], []
    for w in range(k - t + 1):
        coords.append(np.stack([s[:, w], s[:, w + t - 1], nxt[:, w + t - 1]], axis=1))
        owners.append(np.arange(m))
    return np.concatenate(coords), np.concatenate(owners)


def _lifted_interval_colorer(grid: Grid, mrp: MergeReduceParams):
    """One 3D level system per threshold, over the lifted windows."""
    s_all = grid.sorted_ranks
    top = grid.size(0)

    def colorer(rows, seed):
        ids = grid.ids[rows]
        systems = []
        for t in range(1, grid.k + 1):
            coords, owners = lifted_windows(s_all[rows], t, top)
            # the third side is open: (b, inf) over ranks is [b+1, inf)
            systems.append(ranked_level_system(coords, owners, ids, group=t))
        sys = PermutationSystem(
            ids,
            [p for s in systems for p in s.perms],
            [lab for s in systems for lab in s.labels],
            np.concatenate([s.groups for s in systems]),
        )
        return _color(sys, seed, mrp)

    return colorer


def _box_colorer(grid: Grid, meter: ErrorMeter, mrp: MergeReduceParams):
    """Incidence coloring over sampled (rectangle, threshold) ranges.

    Each range's member set is read off by stabbing the lifted boxes of the
    points with the rectangle's doubled apex.
    """
    big = max(grid.size(a) for a in range(grid.d)) + 1
    cache: dict = {}

    def boxes(row, t):
        if (row, t) not in cache:
            cache[(row, t)] = ranked_boxes(grid.ranks[row], t, big)
        return cache[(row, t)]

    lo_all, hi_all = meter.rect_cover(mrp.verify_budget)

    def colorer(rows, seed):
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(lo_all), size=min(RC_RECT_RANGES, len(lo_all)), replace=False)
        lo, hi = lo_all[pick], hi_all[pick]
        apex = np.empty((len(pick), 2 * grid.d), dtype=np.int64)
        apex[:, 0::2], apex[:, 1::2] = -lo, hi - 1
        sets, groups = [], []
        for t in range(1, grid.k + 1):
            blocks = [boxes(int(r), t) for r in rows]
            owner = np.repeat(np.arange(len(rows)), [len(b) for b in blocks])
            B = np.concatenate(blocks)
            stab = ((B[None, :, 0::2] <= apex[:, None, :]) & (apex[:, None, :] < B[None, :, 1::2])).all(2)
            for q in range(len(pick)):
                sets.append(owner[stab[q]])
                groups.append(t)
        return find_incidence_coloring(
            grid.ids[rows], sets, groups, budget=mrp.coloring_budget, seed=seed, restarts=mrp.restarts
        )

    return colorer


def _is_1d(f: FamilyDescriptor) -> bool:
    return f.kind == "halfline" or f.is_1d_intervals


def build_re_disc(
    P: UncertainPointSet, f: FamilyDescriptor, eps: float, mrp: MergeReduceParams | None = None
) -> CoresetArtifact:
    """eps-RE coreset by merge-reduce over canonical (1D) or level permutations."""
    _check_eps(eps)
    mrp = mrp or MergeReduceParams()
    if f.d != P.d:
        raise UnsupportedFamilyError(f"family dimension {f.d} != data dimension {P.d}")
    grid = Grid(P)
    if _is_1d(f):
        mrp = mrp.with_defaults(math.sqrt(P.k), 1.0)
        colorer = _canonical_colorer(grid, mrp, sorted_locations=False)
        ell = P.k
    elif f.kind == "rect":
        mrp = mrp.with_defaults(math.sqrt(P.k), (3 * P.d - 1) / 2)
        colorer = _traversal_level_colorer(grid, mrp)
        ell = P.k * (1 + tree_depth(P.n)) ** (P.d - 1)
    else:
        raise UnsupportedFamilyError(f"no RE construction for family {f.kind!r}")
    meter = ErrorMeter(P, f, budget=mrp.verify_budget, seed=mrp.seed, grid=grid)
    art = merge_reduce(P, f, eps, mrp, colorer, kind="re", meter=meter)
    return replace(art, stats={**art.stats, "ell": ell, "family": f.kind, "d": f.d})


def build_rc_disc(
    P: UncertainPointSet, f: FamilyDescriptor, eps: float, mrp: MergeReduceParams | None = None
) -> CoresetArtifact:
    """eps-RC coreset by merge-reduce, coloring across every threshold at once."""
    _check_eps(eps)
    mrp = mrp or MergeReduceParams()
    if f.d != P.d:
        raise UnsupportedFamilyError(f"family dimension {f.d} != data dimension {P.d}")
    k, d = P.k, P.d
    grid = Grid(P)
    meter = ErrorMeter(P, f, budget=mrp.verify_budget, seed=mrp.seed, grid=grid)
    L = 1 + tree_depth(P.n)
    if f.kind == "halfline":
        mrp = mrp.with_defaults(math.sqrt(k), 1.0)
        colorer = _canonical_colorer(grid, mrp, sorted_locations=True)
        stats = LiftingStats(k, 1, k)
    elif f.is_1d_intervals:
        mrp = mrp.with_defaults(float(k**2), 4.0)
        colorer = _lifted_interval_colorer(grid, mrp)
        ell = L**2
        stats = LiftingStats(ell, k * (k + 1) // 2, k * ell)
    elif f.kind == "rect" and d <= RC_RECT_MAX_D:
        mrp = mrp.with_defaults(k ** (3 * d + 0.5), 6 * d - 0.5)
        colorer = _box_colorer(grid, meter, mrp)
        big = max(grid.size(a) for a in range(d)) + 1
        g_k = max(
            len(ranked_boxes(grid.ranks[i], t, big)) for i in range(P.n) for t in range(1, k + 1)
        )
        ell = L ** (4 * d - 1)
        stats = LiftingStats(ell, g_k, k * g_k * ell)
    else:
        raise UnsupportedFamilyError(
            f"no RC construction for family {f.kind!r} in d={d} (rectangles need d <= {RC_RECT_MAX_D})"
        )
    art = merge_reduce(P, f, eps, mrp, colorer, kind="rc", meter=meter)
    return replace(
        art, stats={**art.stats, "lifting": stats.as_dict(), "family": f.kind, "d": d}
    )


def rq_alpha(eps: float, eps_prime: float, t_size: int) -> float:
    """alpha = eps + sqrt(ln(2/eps') / (2|T|))."""
    if not 0 <= eps < 0.5 or not 0 < eps_prime < 2:
        raise ValueError("need 0 <= eps < 1/2 and 0 < eps' < 2")
    if t_size < 1:
        raise ValueError("|T| must be positive")
    return eps + math.sqrt(math.log(2 / eps_prime) / (2 * t_size))


def build_rq(
    P: UncertainPointSet,
    f: FamilyDescriptor,
    eps: float,
    eps_prime: float,
    method: str = "discrepancy",
    params: MergeReduceParams | SampleParams | None = None,
    seed: int = 0,
) -> CoresetArtifact:
    """RE coreset plus the horizontal error alpha its measured RE error implies."""
    if not 0 < eps < 0.5 or not 0 < eps_prime < 0.5:
        raise ValueError("eps and eps' must lie in (0, 1/2)")
    if method == "discrepancy":
        art = build_re_disc(P, f, eps, params)
        budget = (params or MergeReduceParams()).verify_budget
    elif method == "sample":
        art = build_re_sample(P, f, eps, params or SampleParams(), seed)
        budget = 100_000
    else:
        raise ValueError(f"unknown method {method!r}")
    meter = ErrorMeter(P, f, budget=budget, seed=art.seed or 0)
    eps_measured, _ = meter.re(np.arange(P.n), [P.row(i) for i in art.T.ids])
    alpha = rq_alpha(float(eps_measured), eps_prime, art.T.n)
    rq = RqParams(float(eps_measured), eps_prime, alpha, art.T.n)
    params_out = {
        **art.params,
        "eps": eps,
        "eps_prime": eps_prime,
        "eps_measured": str(eps_measured),
        "alpha": alpha,
        "alpha_valid": rq.valid,
    }
    return replace(art, kind="rq", params=params_out, stats={**art.stats, "rq": rq})


__all__ = [
    "CoresetArtifact",
    "MergeReduceParams",
    "RqParams",
    "SampleParams",
    "UnsupportedFamilyError",
    "build_rc_disc",
    "build_rc_sample",
    "build_re_disc",
    "build_re_sample",
    "build_rq",
    "coreset_size",
    "rq_alpha",
]
