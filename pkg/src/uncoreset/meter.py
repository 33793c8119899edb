"""Exact max-error sweeps between two subsets of one uncertain point set.

Every sweep works on integer location ranks (see ``_grid``) and compares
subsets A and B through D = |B| * count_A - |A| * count_B, so all errors are
exact rationals |D| / (|A| |B| k) for RE and |D| / (|A| |B|) for RC.
For d >= 2 the cover of rectangles is the grid of location cuts, enumerated
when small and uniformly subsampled to the budget otherwise.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import _kernels
from ._grid import Grid
from .model import UncertainPointSet
from .ranges import FamilyDescriptor, HalfLine, Interval, Rect

PREFIX_GRID_CELLS = 25_000_000
CHUNK = 256


class ErrorMeter:
    def __init__(
        self,
        P: UncertainPointSet,
        family: FamilyDescriptor,
        budget: int = 100_000,
        rc_budget: int = 4_000,
        seed: int = 0,
        grid: Grid | None = None,
    ):
        if family.d != P.d:
            raise ValueError(f"family dimension {family.d} != data dimension {P.d}")
        self.P, self.family = P, family
        self.grid = grid or Grid(P)
        self.k = P.k
        self.kind = "interval" if family.is_1d_intervals else family.kind
        self.budget, self.rc_budget, self.seed = budget, rc_budget, seed
        self._rects = {}

    # -- helpers ---------------------------------------------------------

    def _rows(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if len(rows) == 0:
            raise ValueError("cannot measure error against an empty subset")
        return rows

    def _interval(self, lo: int, hi: int) -> Interval:
        if hi < lo:
            return Interval(-math.inf, -math.inf)
        return Interval(self.grid.cut_below(0, lo), self.grid.cut_above(0, hi))

    def _rect(self, lo, hi) -> Rect:
        """Rect selecting ranks lo[a] .. hi[a]-1 on every axis."""
        g = self.grid
        return Rect(tuple((g.cut_below(a, int(lo[a])), g.cut_below(a, int(hi[a]))) for a in range(g.d)))

    def rect_cover(self, budget: int) -> tuple[np.ndarray, np.ndarray]:
        """Rank bounds (R, d) of the rectangle cover; [lo, hi) per axis."""
        if budget in self._rects:
            return self._rects[budget]
        sizes = [self.grid.size(a) for a in range(self.grid.d)]
        pairs = [(v + 1) * v // 2 for v in sizes]
        if math.prod(pairs) <= budget:
            per_axis = []
            for v in sizes:
                i, j = np.triu_indices(v + 1, k=1)
                per_axis.append((i, j))
            idx = np.stack(np.meshgrid(*[np.arange(len(p[0])) for p in per_axis], indexing="ij"), -1)
            idx = idx.reshape(-1, len(sizes))
            lo = np.stack([per_axis[a][0][idx[:, a]] for a in range(len(sizes))], 1)
            hi = np.stack([per_axis[a][1][idx[:, a]] for a in range(len(sizes))], 1)
        else:
            rng = np.random.default_rng(self.seed)
            lo = np.empty((budget, len(sizes)), dtype=np.int64)
            hi = np.empty_like(lo)
            for a, v in enumerate(sizes):
                # two distinct cuts, uniformly over unordered pairs
                x = rng.integers(0, v + 1, size=budget)
                y = rng.integers(0, v, size=budget)
                y = y + (y >= x)
                lo[:, a], hi[:, a] = np.minimum(x, y), np.maximum(x, y)
        self._rects[budget] = (lo.astype(np.int64), hi.astype(np.int64))
        return self._rects[budget]

    def _inside_counts(self, rows, lo, hi) -> np.ndarray:
        """(R, |rows|) number of locations of each row inside each rect."""
        r = self.grid.ranks[rows]  # (m, k, d)
        out = np.empty((len(lo), len(rows)), dtype=np.int64)
        for s in range(0, len(lo), CHUNK):
            l, h = lo[s : s + CHUNK, None, None, :], hi[s : s + CHUNK, None, None, :]
            inside = ((r[None] >= l) & (r[None] < h)).all(axis=3)
            out[s : s + CHUNK] = inside.sum(axis=2)
        return out

    # -- RE ----------------------------------------------------------------

    def re(self, a_rows, b_rows):
        """max over the cover of |E_r(A) - E_r(B)| and a witness range."""
        a, b = self._rows(a_rows), self._rows(b_rows)
        na, nb = len(a), len(b)
        scale = na * nb * self.k
        if self.kind in ("halfline", "interval"):
            V = self.grid.size(0)
            ca = np.bincount(self.grid.ranks[a].ravel(), minlength=V)
            cb = np.bincount(self.grid.ranks[b].ravel(), minlength=V)
            D = np.concatenate([[0], np.cumsum(ca * nb - cb * na)])
            if self.kind == "halfline":
                v = int(np.argmax(np.abs(D)))
                return Fraction(int(abs(D[v])), scale), HalfLine(self.grid.cut_above(0, v - 1))
            hi, lo = int(np.argmax(D)), int(np.argmin(D))
            x, y = min(hi, lo), max(hi, lo)
            return Fraction(int(D[hi] - D[lo]), scale), self._interval(x, y - 1)
        lo, hi = self.rect_cover(self.budget)
        sizes = [self.grid.size(a) for a in range(self.grid.d)]
        if self.grid.d == 2 and sizes[0] * sizes[1] <= PREFIX_GRID_CELLS:
            H = np.zeros((sizes[0] + 1, sizes[1] + 1), dtype=np.int64)
            ra, rb = self.grid.ranks[a].reshape(-1, 2), self.grid.ranks[b].reshape(-1, 2)
            np.add.at(H, (ra[:, 0] + 1, ra[:, 1] + 1), nb)
            np.add.at(H, (rb[:, 0] + 1, rb[:, 1] + 1), -na)
            S = H.cumsum(0).cumsum(1)
            D = S[hi[:, 0], hi[:, 1]] - S[lo[:, 0], hi[:, 1]] - S[hi[:, 0], lo[:, 1]] + S[lo[:, 0], lo[:, 1]]
        else:
            D = nb * self._inside_counts(a, lo, hi).sum(1) - na * self._inside_counts(b, lo, hi).sum(1)
        m = int(np.argmax(np.abs(D)))
        return Fraction(int(abs(D[m])), scale), self._rect(lo[m], hi[m])

    # -- RC ----------------------------------------------------------------

    def rc(self, a_rows, b_rows):
        """sup over the cover and tau in {1/k..1} of |G_A - G_B|, with witness."""
        a, b = self._rows(a_rows), self._rows(b_rows)
        na, nb = len(a), len(b)
        k = self.k
        if self.kind == "halfline":
            V = self.grid.size(0)
            s = self.grid.sorted_ranks
            best = (-1, None, None)
            for t in range(1, k + 1):
                ca = np.bincount(s[a, t - 1], minlength=V)
                cb = np.bincount(s[b, t - 1], minlength=V)
                D = np.concatenate([[0], np.cumsum(ca * nb - cb * na)])
                v = int(np.argmax(np.abs(D)))
                if abs(D[v]) > best[0]:
                    best = (int(abs(D[v])), HalfLine(self.grid.cut_above(0, v - 1)), Fraction(t, k))
            return Fraction(best[0], na * nb), best[1], best[2]
        if self.kind == "interval":
            V = self.grid.size(0)
            s = self.grid.sorted_ranks
            best = (-1, None, None)
            for t in range(1, k + 1):
                lo_key, h0, h1, w = [], [], [], []
                for rows, weight in ((a, nb), (b, -na)):
                    for wdw in range(k - t + 1):
                        lo_key.append(s[rows, wdw])
                        h0.append(s[rows, wdw + t - 1])
                        nxt = s[rows, wdw + t] - 1 if wdw + t < k else np.full(len(rows), V - 1)
                        h1.append(nxt)
                        w.append(np.full(len(rows), weight))
                lo_key, h0, h1, w = (np.concatenate(x) for x in (lo_key, h0, h1, w))
                keep = h1 >= h0  # tied next location empties the window's run
                order = np.argsort(-lo_key[keep], kind="stable")
                val, lo, hi = _kernels.interval_sweep(
                    lo_key[keep][order], h0[keep][order], h1[keep][order], w[keep][order], V
                )
                if val > best[0]:
                    best = (int(val), self._interval(int(lo), int(hi)), Fraction(t, k))
            return Fraction(best[0], na * nb), best[1], best[2]
        lo, hi = self.rect_cover(self.rc_budget)
        ca, cb = self._inside_counts(a, lo, hi), self._inside_counts(b, lo, hi)
        best = (-1, None, None)
        for t in range(1, k + 1):
            D = nb * (ca >= t).sum(1) - na * (cb >= t).sum(1)
            m = int(np.argmax(np.abs(D)))
            if abs(D[m]) > best[0]:
                best = (int(abs(D[m])), self._rect(lo[m], hi[m]), Fraction(t, k))
        return Fraction(best[0], na * nb), best[1], best[2]
