"""Permutation systems over uncertain point ids.

A system is a list of sequences over a ground set of point ids. Discrepancy of
a coloring is measured over contiguous runs of each sequence. Canonical (1D)
and level (tree-based, d >= 2) systems are true permutations; systems built
from lifted points may list an owner more than once.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._grid import Grid, total_order
from .model import UncertainPointSet
from .ranges import Rect


@dataclass(frozen=True)
class IntervalRef:
    """Positions x .. y-1 of permutation j (ranks x < sigma <= y, 1-based)."""

    j: int
    x: int
    y: int

    def __post_init__(self):
        if not 0 <= self.x < self.y:
            raise ValueError(f"empty or inverted interval ({self.x}, {self.y}]")


@dataclass
class TreeMeta:
    """What decompose_range needs to walk a level system."""

    coords: list  # element locations
    ranks: np.ndarray  # (m, d) distinct per-axis ranks
    depth: int  # L = ceil(log2 m)
    positions: list  # per perm: element -> position
    elements: list  # per perm: position -> element

    @property
    def d(self) -> int:
        return self.ranks.shape[1]


@dataclass
class PermutationSystem:
    ids: np.ndarray
    perms: list  # each an int array of ground indices
    labels: list = field(default_factory=list)
    groups: np.ndarray | None = None
    tree: TreeMeta | None = None

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.perms = [np.asarray(p, dtype=np.int64) for p in self.perms]
        if not self.perms:
            raise ValueError("a permutation system needs at least one permutation")
        n = len(self.ids)
        for p in self.perms:
            if len(p) and (p.min() < 0 or p.max() >= n):
                raise ValueError("permutation refers outside the ground set")
        if not self.labels:
            self.labels = list(range(len(self.perms)))
        if self.groups is None:
            self.groups = np.zeros(len(self.perms), dtype=np.int64)
        self.groups = np.asarray(self.groups, dtype=np.int64)

    @property
    def ell(self) -> int:
        return len(self.perms)

    @property
    def n(self) -> int:
        return len(self.ids)

    def is_permutation(self) -> bool:
        return all(
            len(p) == self.n and np.array_equal(np.sort(p), np.arange(self.n))
            for p in self.perms
        )

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """Concatenated perms and their start offsets (length ell + 1)."""
        offsets = np.zeros(self.ell + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([len(p) for p in self.perms])
        return np.concatenate(self.perms), offsets

    def sigma(self, j: int) -> dict:
        """Rank (1-based) of every ground id in permutation j."""
        return {int(self.ids[g]): r for r, g in enumerate(self.perms[j], start=1)}

    def members(self, iv: IntervalRef) -> list[int]:
        return [int(self.ids[g]) for g in self.perms[iv.j][iv.x : iv.y]]

    @staticmethod
    def union(systems: Sequence[PermutationSystem]) -> PermutationSystem:
        """Stack systems over one ground set; groups record the source system."""
        ids = systems[0].ids
        for s in systems[1:]:
            if not np.array_equal(s.ids, ids):
                raise ValueError("systems must share the ground set")
        perms, labels, groups = [], [], []
        for g, s in enumerate(systems):
            perms += s.perms
            labels += [(g, lab) for lab in s.labels]
            groups += [g] * s.ell
        return PermutationSystem(ids, perms, labels, np.array(groups))


def canonical_permutation_system(
    P: UncertainPointSet, sorted_locations: bool = False, grid: Grid | None = None
) -> PermutationSystem:
    """sigma_j orders the points by their j-th location, ties by id."""
    if P.d != 1:
        raise ValueError(f"canonical permutations need d=1, got d={P.d}")
    if grid is None:
        grid = Grid(P)
    ranks = grid.sorted_ranks if sorted_locations else grid.ranks[:, :, 0]
    perms = [total_order(ranks[:, j], grid.ids) for j in range(P.k)]
    return PermutationSystem(grid.ids, perms, labels=list(range(1, P.k + 1)))


def tree_depth(m: int) -> int:
    return max(0, math.ceil(math.log2(m))) if m > 1 else 0


def level_tuples(d: int, depth: int) -> list[tuple]:
    """Lexicographic indexing of the (1+L)^(d-1) level tuples."""
    return list(itertools.product(range(depth + 1), repeat=d - 1))


def _relabel(group: np.ndarray, node: np.ndarray) -> np.ndarray:
    """Dense ids for (group, node) pairs, preserving lexicographic order."""
    _, inv = np.unique(np.stack([group, node], axis=1), axis=0, return_inverse=True)
    return inv.reshape(-1)


def _local_ranks(group: np.ndarray, axis_rank: np.ndarray) -> np.ndarray:
    """Rank of each element along an axis among elements of its group."""
    order = np.lexsort((axis_rank, group))
    g_sorted = group[order]
    starts = np.r_[0, np.flatnonzero(np.diff(g_sorted)) + 1]
    first = np.repeat(starts, np.diff(np.r_[starts, len(order)]))
    local = np.empty(len(order), dtype=np.int64)
    local[order] = np.arange(len(order)) - first
    return local


def level_orders(ranks: np.ndarray, depth: int | None = None) -> list[np.ndarray]:
    """Element orders of all level permutations for distinct per-axis ranks.

    For level tuple (h_0, .., h_{d-2}) the elements are grouped by their
    tree node at level h_a on axis a, nested axis after axis, with node
    intervals taken over ranks local to the enclosing group; inside the
    final group elements are sorted by the last axis.
    """
    m, d = ranks.shape
    if d < 2:
        raise ValueError("level permutations need d >= 2")
    L = tree_depth(m) if depth is None else depth
    orders = []
    for levels in level_tuples(d, L):
        group = np.zeros(m, dtype=np.int64)
        for a, h in enumerate(levels):
            node = _local_ranks(group, ranks[:, a]) >> (L - h)
            group = _relabel(group, node)
        orders.append(np.lexsort((ranks[:, d - 1], group)))
    return orders


def distinct_ranks(coords: Sequence[Sequence], owners: Sequence[int]) -> np.ndarray:
    """Per-axis ranks under the strict order (value, owner id, element index)."""
    m, d = len(coords), len(coords[0])
    out = np.empty((m, d), dtype=np.int64)
    for a in range(d):
        order = sorted(range(m), key=lambda e: (coords[e][a], owners[e], e))
        out[order, a] = np.arange(m)
    return out


def level_permutation_system(
    S: Sequence[tuple[int, Sequence]],
    ground: Sequence[int] | None = None,
) -> PermutationSystem:
    """Level permutations of a set of (owner id, location) pairs, d >= 2."""
    if not S:
        raise ValueError("empty location set")
    owners = [int(o) for o, _ in S]
    coords = [tuple(loc) for _, loc in S]
    d = len(coords[0])
    if d < 2:
        raise ValueError(f"level permutations need d >= 2, got d={d}")
    ids = np.array(sorted(set(owners)) if ground is None else list(ground), dtype=np.int64)
    index = {int(i): g for g, i in enumerate(ids)}
    owner_idx = np.array([index[o] for o in owners], dtype=np.int64)
    ranks = distinct_ranks(coords, owners)
    L = tree_depth(len(S))
    orders = level_orders(ranks, L)
    positions = []
    for o in orders:
        pos = np.empty(len(o), dtype=np.int64)
        pos[o] = np.arange(len(o))
        positions.append(pos)
    tree = TreeMeta(coords, ranks, L, positions, orders)
    return PermutationSystem(
        ids, [owner_idx[o] for o in orders], labels=level_tuples(d, L), tree=tree
    )


def _canonical_nodes(lo: int, hi: int, depth: int) -> list[tuple[int, int]]:
    """Maximal tree nodes (level, index) covering ranks [lo, hi)."""
    out = []

    def walk(h, idx):
        width = 1 << (depth - h)
        a, b = idx * width, (idx + 1) * width
        if b <= lo or a >= hi:
            return
        if lo <= a and b <= hi:
            out.append((h, idx))
            return
        walk(h + 1, 2 * idx)
        walk(h + 1, 2 * idx + 1)

    if lo < hi:
        walk(0, 0)
    return out


def decompose_range(sys: PermutationSystem, r: Rect) -> list[IntervalRef]:
    """Disjoint permutation intervals whose union is the set of elements in r."""
    tree = sys.tree
    if tree is None:
        raise ValueError("decompose_range needs a level permutation system")
    if r.dim != tree.d:
        raise ValueError(f"rectangle dimension {r.dim} != system dimension {tree.d}")
    d, L = tree.d, tree.depth
    lex = {lv: j for j, lv in enumerate(level_tuples(d, L))}
    out: list[IntervalRef] = []

    def in_axis(members, a):
        """Members sorted along axis a and the slice whose coordinate is in r."""
        srt = members[np.argsort(tree.ranks[members, a], kind="stable")]
        vals = [tree.coords[e][a] for e in srt]
        lo_b, hi_b = r.bounds[a]
        return srt, bisect.bisect_left(vals, lo_b), bisect.bisect_right(vals, hi_b)

    def recurse(members, a, levels):
        srt, lo, hi = in_axis(members, a)
        if a == d - 1:
            if lo < hi:
                j = lex[levels]
                start = int(tree.positions[j][srt].min())
                out.append(IntervalRef(j, start + lo, start + hi))
            return
        for h, idx in _canonical_nodes(lo, hi, L):
            width = 1 << (L - h)
            recurse(srt[idx * width : (idx + 1) * width], a + 1, levels + (h,))

    recurse(np.arange(len(tree.coords)), 0, ())
    return out


def ranked_level_system(
    coords: np.ndarray, owners: np.ndarray, ids: np.ndarray, group: int = 0
) -> PermutationSystem:
    """Level permutations of integer-coordinate elements owned by ground indices.

    ``coords`` is (m, D) with D >= 2; ties are broken by (owner id, element
    index) exactly as in ``level_permutation_system``.
    """
    m, D = coords.shape
    ranks = np.empty((m, D), dtype=np.int64)
    elem = np.arange(m)
    for a in range(D):
        order = np.lexsort((elem, ids[owners], coords[:, a]))
        ranks[order, a] = elem
    L = tree_depth(m)
    orders = level_orders(ranks, L)
    labels = [(group, lv) for lv in level_tuples(D, L)]
    return PermutationSystem(ids, [owners[o] for o in orders], labels, np.full(len(orders), group))
