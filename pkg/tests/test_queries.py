from fractions import Fraction

import numpy as np
import pytest
from helpers import as_points, random_set
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import cdf_by_enumeration, expected, threshold_fraction

from uncoreset.queries import (
    CdfTable,
    brute_force_cdf,
    cdf_from_counts,
    expected_fraction,
    poisson_binomial_pmf,
    rc_fraction,
    rq_cdf,
)
from uncoreset.ranges import HalfLine, Interval


def test_example_expected_fraction(example_P, example_T, example_r):
    assert expected_fraction(example_P, example_r) == Fraction(13, 20)
    assert expected_fraction(example_T, example_r) == Fraction(7, 10)


def test_example_cdfs(example_P, example_T, example_r):
    FP, FT = rq_cdf(example_P, example_r), rq_cdf(example_T, example_r)
    assert FP(Fraction(3, 4)) == Fraction(99, 128)
    assert FP(0.75) == Fraction(99, 128)
    for tau in (Fraction(3, 5), Fraction(7, 10), Fraction(79, 100)):
        assert FT(tau) == Fraction(1, 2)
    for tau in (Fraction(4, 5), Fraction(9, 10), Fraction(99, 100)):
        assert FT(tau) == Fraction(7, 8)
    assert FT(1) == 1


def test_example_rc_threshold_two_thirds(example_P, example_T, example_r):
    # with k = 2 a point reaches probability 2/3 only with both locations inside
    assert rc_fraction(example_P, example_r, Fraction(2, 3)) == Fraction(3, 10)
    assert rc_fraction(example_T, example_r, Fraction(2, 3)) == Fraction(2, 5)


def test_rc_fraction_rejects_bad_tau(example_P, example_r):
    for tau in (0, -0.1, 1.5):
        with pytest.raises(ValueError):
            rc_fraction(example_P, example_r, tau)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 6),
    k=st.integers(1, 4),
    seed=st.integers(0, 10**6),
    lo=st.integers(0, 60),
    width=st.integers(0, 60),
)
def test_rq_cdf_matches_enumeration(n, k, seed, lo, width):
    P = random_set(np.random.default_rng(seed), n, k, grid=60)
    r = Interval(lo, lo + width)
    want = cdf_by_enumeration(as_points(P), ((lo, lo + width),))
    got = rq_cdf(P, r)
    assert [got(Fraction(c, n)) for c in range(n + 1)] == [want[c] for c in range(n + 1)]
    assert brute_force_cdf(P, r) == got


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), k=st.integers(1, 4), seed=st.integers(0, 10**6), x=st.integers(0, 60))
def test_fractions_match_oracle(n, k, seed, x):
    P = random_set(np.random.default_rng(seed), n, k, grid=60)
    pts, box = as_points(P), ((-1, x),)
    assert expected_fraction(P, HalfLine(x)) == expected(pts, box, k)
    for t in range(1, k + 1):
        assert rc_fraction(P, HalfLine(x), Fraction(t, k)) == threshold_fraction(pts, box, k, t)


def test_float_cdf_close_to_exact():
    rng = np.random.default_rng(5)
    counts = rng.integers(0, 4, size=40).tolist()
    exact, approx = cdf_from_counts(counts, 3, exact=True), cdf_from_counts(counts, 3, exact=False)
    assert max(abs(float(a) - b) for a, b in zip(exact.values, approx.values)) < 1e-12
    assert abs(poisson_binomial_pmf(counts, 3).sum() - 1) < 1e-12


def test_cdf_table_steps():
    F = CdfTable((Fraction(0), Fraction(1, 2), Fraction(1)), (Fraction(1, 4), Fraction(3, 4), Fraction(1)))
    assert F(-1) == 0 and F(0) == Fraction(1, 4) and F(Fraction(1, 2)) == Fraction(3, 4)
    assert F.pmf() == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]
    with pytest.raises(ValueError):
        CdfTable((0, 1), (Fraction(1), Fraction(1, 2)))


def test_brute_force_limit():
    P = random_set(np.random.default_rng(0), 21, 2)
    with pytest.raises(ValueError):
        brute_force_cdf(P, HalfLine(0))
