"""Uncertain point sets: n points, each with k equally likely locations in R^d."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

Location = tuple  # d real coordinates


def _as_coord(c):
    if isinstance(c, np.generic):
        c = c.item()
    if isinstance(c, bool) or not isinstance(c, Real):
        raise TypeError(f"coordinate {c!r} is not a real number")
    if not math.isfinite(c):
        raise ValueError(f"coordinate {c!r} is not finite")
    return c


@dataclass(frozen=True)
class UncertainPoint:
    id: int
    locations: tuple[Location, ...]

    def __post_init__(self):
        locs = tuple(tuple(_as_coord(c) for c in loc) for loc in self.locations)
        if not locs:
            raise ValueError(f"point {self.id} has no locations")
        d = len(locs[0])
        if d < 1:
            raise ValueError(f"point {self.id} has zero-dimensional locations")
        if any(len(loc) != d for loc in locs):
            raise ValueError(f"point {self.id} mixes location dimensions")
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "locations", locs)

    @property
    def k(self) -> int:
        return len(self.locations)

    @property
    def d(self) -> int:
        return len(self.locations[0])

    def sorted_locations(self) -> UncertainPoint:
        return UncertainPoint(self.id, tuple(sorted(self.locations)))


@dataclass(frozen=True)
class UncertainPointSet:
    """A set of uncertain points sharing k and d, with unique ids.

    Every location carries probability exactly 1/k.
    """

    points: tuple[UncertainPoint, ...]
    _row: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(self.points)
        if not pts:
            raise ValueError("an uncertain point set needs at least one point")
        k, d = pts[0].k, pts[0].d
        row = {}
        for i, p in enumerate(pts):
            if p.k != k or p.d != d:
                raise ValueError(
                    f"point {p.id} has k={p.k}, d={p.d}; expected k={k}, d={d}"
                )
            if p.id in row:
                raise ValueError(f"duplicate point id {p.id}")
            row[p.id] = i
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_row", row)

    @classmethod
    def from_array(cls, locations, ids: Sequence[int] | None = None) -> UncertainPointSet:
        """Build from an array of shape (n, k) for d=1 or (n, k, d)."""
        arr = np.asarray(locations)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError("expected an array of shape (n, k) or (n, k, d)")
        if ids is None:
            ids = range(1, arr.shape[0] + 1)
        return cls(
            tuple(
                UncertainPoint(i, tuple(tuple(loc) for loc in arr[r].tolist()))
                for r, i in enumerate(ids)
            )
        )

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def k(self) -> int:
        return self.points[0].k

    @property
    def d(self) -> int:
        return self.points[0].d

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[UncertainPoint]:
        return iter(self.points)

    def __contains__(self, pid) -> bool:
        return pid in self._row

    def point(self, pid: int) -> UncertainPoint:
        return self.points[self._row[pid]]

    def row(self, pid: int) -> int:
        return self._row[pid]

    def subset(self, ids: Iterable[int]) -> UncertainPointSet:
        """Points with the given ids, in the order of ``ids``."""
        return UncertainPointSet(tuple(self.points[self._row[i]] for i in ids))

    def take(self, rows: Iterable[int]) -> UncertainPointSet:
        return UncertainPointSet(tuple(self.points[int(r)] for r in rows))

    def sorted_locations(self) -> UncertainPointSet:
        """Same points with each point's locations in ascending order."""
        return UncertainPointSet(tuple(p.sorted_locations() for p in self.points))

    def is_subset_of(self, other: UncertainPointSet) -> bool:
        return all(p.id in other and other.point(p.id) == p for p in self.points)


@dataclass(frozen=True)
class Transversal:
    """One instantiation: point id -> chosen location index in [1..k]."""

    choice: Mapping[int, int]

    def locations(self, P: UncertainPointSet) -> list[tuple[int, Location]]:
        return [(p.id, p.locations[self.choice[p.id] - 1]) for p in P]


@dataclass(frozen=True)
class CertifiedSet:
    """All n*k locations as (point id, location index, location) triples."""

    entries: tuple[tuple[int, int, Location], ...]
    k: int
    d: int

    def __len__(self) -> int:
        return len(self.entries)

    def locations(self) -> list[Location]:
        return [loc for _, _, loc in self.entries]


def canonical_traversal(P: UncertainPointSet, j: int) -> list[tuple[int, Location]]:
    """The j-th location (1-based) of every point."""
    if not 1 <= j <= P.k:
        raise IndexError(f"location index {j} outside [1, {P.k}]")
    return [(p.id, p.locations[j - 1]) for p in P]


def certify(P: UncertainPointSet) -> CertifiedSet:
    entries = tuple(
        (p.id, j, loc) for p in P for j, loc in enumerate(p.locations, start=1)
    )
    return CertifiedSet(entries, P.k, P.d)


def instantiate(P: UncertainPointSet, seed: int) -> Transversal:
    rng = np.random.default_rng(seed)
    picks = rng.integers(1, P.k + 1, size=P.n)
    return Transversal({p.id: int(c) for p, c in zip(P, picks)})


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)
