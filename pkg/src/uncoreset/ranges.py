"""Range families over locations and their finite canonical covers."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from ._grid import midpoint
from .model import CertifiedSet, Location, UncertainPoint

INF = math.inf

FAMILIES = ("halfline", "interval", "rect")


def _check_dim(x: Location, d: int) -> None:
    if len(x) != d:
        raise ValueError(f"location of dimension {len(x)} tested against a {d}-dim range")


@dataclass(frozen=True)
class HalfLine:
    """(-inf, x]"""

    x: object

    dim = 1

    def contains(self, loc: Location) -> bool:
        _check_dim(loc, 1)
        return loc[0] <= self.x


@dataclass(frozen=True)
class Interval:
    """[a, b], closed on both sides."""

    a: object
    b: object

    dim = 1

    def __post_init__(self):
        if self.a > self.b:
            raise ValueError(f"interval endpoints out of order: {self.a} > {self.b}")

    def contains(self, loc: Location) -> bool:
        _check_dim(loc, 1)
        return self.a <= loc[0] <= self.b


@dataclass(frozen=True)
class Rect:
    """Axis-aligned closed box, one (a_i, b_i) pair per axis."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((lo, hi) for lo, hi in self.bounds)
        if not b:
            raise ValueError("a rectangle needs at least one axis")
        for lo, hi in b:
            if lo > hi:
                raise ValueError(f"rectangle side out of order: {lo} > {hi}")
        object.__setattr__(self, "bounds", b)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def contains(self, loc: Location) -> bool:
        _check_dim(loc, self.dim)
        return all(lo <= c <= hi for c, (lo, hi) in zip(loc, self.bounds))


@dataclass(frozen=True)
class NegOrthant:
    """prod (-inf, apex_i]"""

    apex: tuple

    def __post_init__(self):
        object.__setattr__(self, "apex", tuple(self.apex))

    @property
    def dim(self) -> int:
        return len(self.apex)

    def contains(self, loc: Location) -> bool:
        _check_dim(loc, self.dim)
        return all(c <= a for c, a in zip(loc, self.apex))


@dataclass(frozen=True)
class LiftedQueryBox:
    """prod over i of (-inf, a_i] x (a_i, inf), in 2D dimensions.

    The image of a query point ``a`` under the box lifting: a lifted box point
    (lo_1, hi_1, ..., lo_D, hi_D) is inside iff lo_i <= a_i < hi_i for all i,
    i.e. iff ``a`` lies in the half-open box.
    """

    apex: tuple

    def __post_init__(self):
        object.__setattr__(self, "apex", tuple(self.apex))

    @property
    def dim(self) -> int:
        return 2 * len(self.apex)

    @property
    def bounds(self) -> tuple:
        out = []
        for a in self.apex:
            out += [(-INF, a), (a, INF)]
        return tuple(out)

    def contains(self, loc: Location) -> bool:
        _check_dim(loc, self.dim)
        return all(
            loc[2 * i] <= a < loc[2 * i + 1] for i, a in enumerate(self.apex)
        )


@dataclass(frozen=True)
class ThreeSidedRange:
    """[a, inf) x (-inf, b] x (b, inf): the lifted image of the interval [a, b]."""

    a: object
    b: object

    dim = 3

    def contains(self, loc: Location) -> bool:
        _check_dim(loc, 3)
        return loc[0] >= self.a and loc[1] <= self.b and loc[2] > self.b


Range = Union[HalfLine, Interval, Rect, NegOrthant, LiftedQueryBox, ThreeSidedRange]


def contains(r: Range, x: Location) -> bool:
    return r.contains(tuple(x))


@dataclass(frozen=True)
class FamilyDescriptor:
    kind: str
    d: int = 1
    vc_dim: int | None = None

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown range family {self.kind!r}")
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        if self.kind in ("halfline", "interval") and self.d != 1:
            raise ValueError(f"{self.kind} ranges are one-dimensional")
        if self.vc_dim is None:
            default = {"halfline": 1, "interval": 2, "rect": 2 * self.d}[self.kind]
            object.__setattr__(self, "vc_dim", default)
        if self.vc_dim < 1:
            raise ValueError("VC dimension must be at least 1")

    @property
    def is_1d_intervals(self) -> bool:
        """Two-sided 1D ranges (intervals, or rectangles with d=1)."""
        return self.kind == "interval" or (self.kind == "rect" and self.d == 1)


def inclusion_prob(p: UncertainPoint, r: Range) -> Fraction:
    return Fraction(sum(1 for loc in p.locations if r.contains(loc)), p.k)


def cut_points(values) -> list:
    """-inf, the midpoints between consecutive distinct values, +inf."""
    distinct = sorted(set(values))
    return [-INF] + [midpoint(a, b) for a, b in zip(distinct, distinct[1:])] + [INF]


def _interval_cuts(cuts: list) -> list[tuple]:
    """All (lo, hi) cut pairs selecting a contiguous run, plus one empty pair."""
    pairs = [(cuts[i], cuts[j]) for i in range(len(cuts)) for j in range(i + 1, len(cuts))]
    return [(cuts[0], cuts[0])] + pairs


def canonical_ranges(
    C: CertifiedSet,
    f: FamilyDescriptor,
    budget: int | None = None,
    seed: int = 0,
) -> list[Range]:
    """A finite cover of the family: every range induces the same subset of C
    as some returned range.

    For rectangles with more combinations than ``budget`` the cover is a
    uniform sample of that size (seeded).
    """
    if f.d != C.d:
        raise ValueError(f"family dimension {f.d} != data dimension {C.d}")
    locs = C.locations()
    if f.kind == "halfline":
        return [HalfLine(x) for x in cut_points(loc[0] for loc in locs)]
    if f.kind == "interval":
        return [Interval(a, b) for a, b in _interval_cuts(cut_points(loc[0] for loc in locs))]
    if f.kind != "rect":
        raise ValueError(f"unsupported family {f.kind!r}")
    per_axis = [_interval_cuts(cut_points(loc[a] for loc in locs)) for a in range(f.d)]
    total = math.prod(len(s) for s in per_axis)
    if budget is None or total <= budget:
        return [Rect(b) for b in itertools.product(*per_axis)]
    rng = np.random.default_rng(seed)
    picks = [rng.integers(0, len(s), size=budget) for s in per_axis]
    return [
        Rect(tuple(per_axis[a][picks[a][m]] for a in range(f.d))) for m in range(budget)
    ]
