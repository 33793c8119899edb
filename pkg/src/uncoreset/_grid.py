"""Rank compression of location coordinates.

All exact sweeps work on integer ranks. Coordinates are compared with Python's
exact ordering once, here; nothing downstream touches coordinate arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .model import UncertainPointSet


def midpoint(a, b) -> Fraction:
    return (Fraction(a) + Fraction(b)) / 2


class Grid:
    """Dense per-axis ranks of every location of ``P``.

    ``ranks[i, j, a]`` is the rank of location j of row i on axis a among the
    distinct values on that axis; equal values share a rank.
    """

    def __init__(self, P: UncertainPointSet):
        self.P = P
        self.n, self.k, self.d = P.n, P.k, P.d
        self.ids = np.array(P.ids, dtype=np.int64)
        self.ranks = np.empty((self.n, self.k, self.d), dtype=np.int64)
        self.values: list[list] = []
        for a in range(self.d):
            distinct = sorted({loc[a] for p in P for loc in p.locations})
            index = {v: r for r, v in enumerate(distinct)}
            self.values.append(distinct)
            for i, p in enumerate(P):
                for j, loc in enumerate(p.locations):
                    self.ranks[i, j, a] = index[loc[a]]
        self._sorted = None

    def size(self, axis: int = 0) -> int:
        return len(self.values[axis])

    @property
    def sorted_ranks(self) -> np.ndarray:
        """Per-row location ranks sorted ascending, shape (n, k); d=1 only."""
        if self._sorted is None:
            self._sorted = np.sort(self.ranks[:, :, 0], axis=1)
        return self._sorted

    def rows(self, ids) -> np.ndarray:
        return np.array([self.P.row(i) for i in ids], dtype=np.int64)

    def cut_below(self, axis: int, r: int):
        """A coordinate strictly between value rank r-1 and r (or -inf)."""
        vals = self.values[axis]
        if r <= 0:
            return -math.inf
        if r >= len(vals):
            return math.inf
        return midpoint(vals[r - 1], vals[r])

    def cut_above(self, axis: int, r: int):
        """A coordinate strictly between value rank r and r+1 (or +inf)."""
        return self.cut_below(axis, r + 1)


def total_order(keys: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Indices sorting by (key, id): the strict order used for permutations."""
    return np.lexsort((ids, keys))


def order_ranks(keys: np.ndarray, ids: np.ndarray) -> np.ndarray:
    order = total_order(keys, ids)
    out = np.empty(len(order), dtype=np.int64)
    out[order] = np.arange(len(order))
    return out
