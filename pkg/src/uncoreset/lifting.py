"""Liftings that turn threshold range counting into plain point counting.

In 1D, a point has at least t locations in [a, b] iff exactly one of its
lifted windows (s_{j-t+1}, s_j, s_{j+1}) lies in [a, inf) x (-inf, b] x (b, inf).
For rectangles, coordinates are doubled so a rectangle becomes a negative
orthant; the apexes of the minimal orthants holding t locations of a point
generate an up-closed region, which is cut into disjoint half-open boxes.
A rectangle catches t locations iff its doubled apex stabs one of those boxes,
and a second lifting maps each box to a point and the apex to a query box.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import UncertainPoint, UncertainPointSet
from .ranges import LiftedQueryBox, NegOrthant, Rect, ThreeSidedRange

INF = math.inf


@dataclass(frozen=True)
class LiftedPoint:
    owner: int
    t: int
    coords: tuple


@dataclass(frozen=True)
class ApexSet:
    owner: int
    t: int
    apexes: tuple


@dataclass(frozen=True)
class BoxSet:
    """Pairwise disjoint boxes prod [lo_i, hi_i); hi_i may be +inf."""

    owner: int
    t: int
    boxes: tuple

    def __len__(self) -> int:
        return len(self.boxes)

    def contains(self, x) -> int:
        """Number of boxes containing x (0 or 1 for a valid set)."""
        return sum(all(lo <= c < hi for c, (lo, hi) in zip(x, b)) for b in self.boxes)


@dataclass(frozen=True)
class LiftingStats:
    ell: int  # permutations per lifted system
    g_k: int  # lifted elements per uncertain point
    h: int  # total permutations over all thresholds

    def as_dict(self) -> dict:
        return {"ell": self.ell, "g_k": self.g_k, "h": self.h}


# -- 1D three-sided lifting ------------------------------------------------


def lift_rc_1d(p: UncertainPoint, t: int) -> list[LiftedPoint]:
    """One lifted point per window of t consecutive sorted locations."""
    if p.d != 1:
        raise ValueError("the 3D lifting needs one-dimensional locations")
    if not 1 <= t <= p.k:
        raise ValueError(f"threshold t={t} outside [1, {p.k}]")
    s = [loc[0] for loc in p.locations]
    if any(b < a for a, b in zip(s, s[1:])):
        raise ValueError(f"locations of point {p.id} must be sorted ascending")
    nxt = s[1:] + [INF]
    return [LiftedPoint(p.id, t, (s[j - t + 1], s[j], nxt[j])) for j in range(t - 1, p.k)]


def lift_rc_query_1d(a, b) -> ThreeSidedRange:
    if a > b:
        raise ValueError(f"interval endpoints out of order: {a} > {b}")
    return ThreeSidedRange(a, b)


# -- doubling and tight apexes --------------------------------------------


def double_coords(x):
    """Point q -> (-q1, q1, ..); Rect prod [a_i, b_i] -> NegOrthant (-a1, b1, ..)."""
    if isinstance(x, Rect):
        return NegOrthant(tuple(v for lo, hi in x.bounds for v in (-lo, hi)))
    return tuple(v for c in x for v in (-c, c))


def _apex_ranks(X: np.ndarray, t: int) -> np.ndarray:
    """Minimal grid apexes whose negative orthant holds >= t rows of X.

    X is (k, D) in integer rank space; candidates range over the per-axis
    coordinate values of X. Minimal apexes are tight: lowering any coordinate
    drops a location on that facet.
    """
    axes = [np.unique(X[:, i]) for i in range(X.shape[1])]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, X.shape[1])
    counts = (X[None, :, :] <= grid[:, None, :]).all(axis=2).sum(axis=1)
    cand = grid[counts >= t]
    # drop candidates dominating a different candidate
    dom = (cand[:, None, :] >= cand[None, :, :]).all(axis=2)
    np.fill_diagonal(dom, False)
    return cand[~dom.any(axis=1)]


def _boxes_ranks(C: np.ndarray) -> tuple[list[tuple], list[np.ndarray]]:
    """Disjoint half-open boxes covering the union of [c, inf) over apexes C.

    Boxes are in the per-axis index space of the sorted distinct apex
    coordinates; an upper index equal to the axis size means +inf.
    """
    D = C.shape[1]
    cuts = [np.unique(C[:, i]) for i in range(D)]
    corners = np.stack(np.meshgrid(*cuts, indexing="ij"), -1).reshape(-1, D)
    index = np.stack(
        np.meshgrid(*[np.arange(len(c)) for c in cuts], indexing="ij"), -1
    ).reshape(-1, D)
    inside = (corners[:, None, :] >= C[None, :, :]).all(axis=2).any(axis=1)
    boxes = [tuple((int(i), int(i) + 1) for i in idx) for idx in index[inside]]
    for axis in range(D - 1, -1, -1):
        runs = defaultdict(list)
        for b in boxes:
            runs[b[:axis] + b[axis + 1 :]].append(b[axis])
        merged = []
        for key, spans in runs.items():
            spans.sort()
            lo, hi = spans[0]
            for a, b in spans[1:]:
                if a == hi:
                    hi = b
                else:
                    merged.append(key[:axis] + ((lo, hi),) + key[axis:])
                    lo, hi = a, b
            merged.append(key[:axis] + ((lo, hi),) + key[axis:])
        boxes = merged
    return sorted(boxes), cuts


def _to_ranks(columns: Sequence[Sequence]) -> tuple[np.ndarray, list[list]]:
    """Rank-compress each column of exact values."""
    values = [sorted(set(col)) for col in columns]
    ranks = np.array(
        [[vals.index(v) for v in col] for col, vals in zip(columns, values)], dtype=np.int64
    ).T
    return ranks, values


def tight_apexes(p: UncertainPoint, t: int) -> ApexSet:
    """Apexes of the minimal tight negative orthants with >= t doubled locations.

    In general position these are exactly the tight orthants containing t
    locations; with ties the count may jump past t and the minimal ones still
    generate the same region.
    """
    if not 1 <= t <= p.k:
        raise ValueError(f"threshold t={t} outside [1, {p.k}]")
    X = [double_coords(loc) for loc in p.locations]
    ranks, values = _to_ranks(list(zip(*X)))
    A = _apex_ranks(ranks, t)
    apexes = tuple(sorted(tuple(values[i][r] for i, r in enumerate(row)) for row in A.tolist()))
    return ApexSet(p.id, t, apexes)


def disjoint_boxes(C: ApexSet) -> BoxSet:
    if not C.apexes:
        return BoxSet(C.owner, C.t, ())
    ranks, values = _to_ranks(list(zip(*C.apexes)))
    boxes, _ = _boxes_ranks(ranks)
    out = []
    for b in boxes:
        out.append(
            tuple(
                (values[i][lo], values[i][hi] if hi < len(values[i]) else INF)
                for i, (lo, hi) in enumerate(b)
            )
        )
    return BoxSet(C.owner, C.t, tuple(out))


def lift_boxes(B: BoxSet) -> list[LiftedPoint]:
    return [LiftedPoint(B.owner, B.t, tuple(v for side in b for v in side)) for b in B.boxes]


def lift_query_point(a) -> LiftedQueryBox:
    return LiftedQueryBox(tuple(a))


def rc_count_via_boxes(P: UncertainPointSet, r: Rect, t: int) -> int:
    """Number of points with >= t locations in r, by stabbing lifted boxes."""
    if P.d not in (1, 2):
        raise ValueError(f"box lifting is supported for d in {{1, 2}}, got d={P.d}")
    if r.dim != P.d:
        raise ValueError(f"rectangle dimension {r.dim} != data dimension {P.d}")
    query = lift_query_point(double_coords(r).apex)
    hits = 0
    for p in P:
        for q in lift_boxes(disjoint_boxes(tight_apexes(p, t))):
            hits += query.contains(q.coords)
    return hits


def ranked_boxes(ranks: np.ndarray, t: int, big: int) -> np.ndarray:
    """Boxes of one point in doubled rank space as an (m, 2D) array of lo/hi.

    ``ranks`` is (k, d) integer location ranks; ``big`` encodes +inf and must
    exceed every doubled rank of every point and query.
    """
    X = np.stack([v for c in ranks.T for v in (-c, c)], axis=1)
    A = _apex_ranks(X, t)
    boxes, cuts = _boxes_ranks(A)
    out = np.empty((len(boxes), 2 * X.shape[1]), dtype=np.int64)
    for m, b in enumerate(boxes):
        for i, (lo, hi) in enumerate(b):
            out[m, 2 * i] = cuts[i][lo]
            out[m, 2 * i + 1] = cuts[i][hi] if hi < len(cuts[i]) else big
    return out
