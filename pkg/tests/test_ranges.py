from fractions import Fraction

import numpy as np
import pytest
from helpers import random_set

from uncoreset.model import UncertainPoint, certify
from uncoreset.ranges import (
    FamilyDescriptor,
    HalfLine,
    Interval,
    LiftedQueryBox,
    NegOrthant,
    Rect,
    ThreeSidedRange,
    canonical_ranges,
    cut_points,
    inclusion_prob,
)


def test_containment_is_closed():
    assert HalfLine(3).contains((3,)) and not HalfLine(3).contains((3.5,))
    assert Interval(1, 2).contains((1,)) and Interval(1, 2).contains((2,))
    assert Rect(((0, 1), (0, 1))).contains((1, 0)) and not Rect(((0, 1), (0, 1))).contains((1.1, 0))
    assert NegOrthant((1, 2)).contains((1, 2)) and not NegOrthant((1, 2)).contains((1, 3))


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        HalfLine(1).contains((1, 2))
    with pytest.raises(ValueError):
        Rect(((0, 1),)).contains((0, 0))
    with pytest.raises(ValueError):
        Interval(2, 1)


def test_three_sided_and_lifted_box():
    r = ThreeSidedRange(2, 5)
    assert r.contains((2, 5, 6)) and not r.contains((2, 5, 5)) and not r.contains((1, 4, 9))
    q = LiftedQueryBox((3, 4))
    # coords are (lo1, hi1, lo2, hi2); each axis is half-open, lo <= a < hi
    assert q.contains((3, 4, 4, 5)) and q.contains((2, 9, 0, 5))
    assert not q.contains((3, 3, 4, 5)) and not q.contains((4, 5, 4, 5)) and not q.contains((3, 4, 5, 6))


def test_family_defaults():
    assert FamilyDescriptor("halfline").vc_dim == 1
    assert FamilyDescriptor("interval").vc_dim == 2
    assert FamilyDescriptor("rect", 3).vc_dim == 6
    assert FamilyDescriptor("rect", 1).is_1d_intervals
    with pytest.raises(ValueError):
        FamilyDescriptor("halfline", 2)
    with pytest.raises(ValueError):
        FamilyDescriptor("ball")


def test_inclusion_prob():
    p = UncertainPoint(1, ((1,), (2,), (3,)))
    assert inclusion_prob(p, HalfLine(2)) == Fraction(2, 3)


def test_cut_points_separate_values():
    cuts = cut_points([3, 1, 1, 2])
    assert cuts[0] == -np.inf and cuts[-1] == np.inf
    assert cuts[1:-1] == [Fraction(3, 2), Fraction(5, 2)]


@pytest.mark.parametrize("kind,d", [("halfline", 1), ("interval", 1), ("rect", 2)])
def test_canonical_ranges_cover_every_subset(kind, d):
    """Every subset a range can cut out is produced by some canonical range."""
    rng = np.random.default_rng(11)
    P = random_set(rng, 4, 2, d, grid=5)
    C = certify(P)
    locs = C.locations()
    got = {frozenset(i for i, l in enumerate(locs) if r.contains(l)) for r in canonical_ranges(C, FamilyDescriptor(kind, d))}
    vals = [sorted({l[a] for l in locs}) for a in range(d)]
    want = {frozenset()}
    for box in _all_boxes(vals, kind):
        want.add(frozenset(i for i, l in enumerate(locs) if all(lo <= c <= hi for c, (lo, hi) in zip(l, box))))
    assert got == want


def _all_boxes(vals, kind):
    import itertools

    if kind == "halfline":
        return [((-1, v),) for v in vals[0]]
    per = [list(itertools.combinations_with_replacement(v, 2)) for v in vals]
    return list(itertools.product(*per))


def test_canonical_ranges_budget_samples():
    rng = np.random.default_rng(0)
    P = random_set(rng, 30, 2, 2)
    rs = canonical_ranges(certify(P), FamilyDescriptor("rect", 2), budget=100, seed=1)
    assert len(rs) == 100
    assert rs == canonical_ranges(certify(P), FamilyDescriptor("rect", 2), budget=100, seed=1)
