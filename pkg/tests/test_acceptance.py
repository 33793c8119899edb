"""Acceptance criteria, one check per criterion.

Each ``criterion_N`` returns (passed, detail). Under pytest every check prints
one PASS/FAIL line (visible without -s) and then asserts. Running this file
directly prints the same lines for all criteria.
"""

from __future__ import annotations

import math
import sys
import time
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import as_points, example_set, random_set  # noqa: E402
from oracles import transversal_variance  # noqa: E402

from uncoreset.coresets import (  # noqa: E402
    MergeReduceParams,
    SampleParams,
    build_rc_disc,
    build_rc_sample,
    build_re_disc,
    build_re_sample,
    build_rq,
    coreset_size,
    rq_alpha,
)
from uncoreset.discrepancy import (  # noqa: E402
    Coloring,
    DiscrepancyTargetWarning,
    disc_target,
    eval_disc,
    exhaustive_coloring,
    find_coloring,
)
from uncoreset.lifting import (  # noqa: E402
    disjoint_boxes,
    double_coords,
    lift_rc_1d,
    lift_rc_query_1d,
    rc_count_via_boxes,
    tight_apexes,
)
from uncoreset.meter import ErrorMeter  # noqa: E402
from uncoreset.model import UncertainPoint, canonical_traversal  # noqa: E402
from uncoreset.permutations import PermutationSystem, canonical_permutation_system  # noqa: E402
from uncoreset.queries import brute_force_cdf, expected_fraction, rc_fraction, rq_cdf  # noqa: E402
from uncoreset.ranges import FamilyDescriptor, HalfLine, Interval, Rect  # noqa: E402
from uncoreset.verify import quantization_check, variance_report, zero_bias_check  # noqa: E402

HALF = FamilyDescriptor("halfline")

# pinned tolerances
EXAMPLE_EPS_PRIME, EXAMPLE_ALPHA = 0.1016, 0.1
EXAMPLE_TIME_S = 1.0
ORACLE_TIME_S = 60.0
LIFTING_TIME_S = 300.0
BUILD_TIME_S = 600.0
BIAS_SIGMAS = 3.0
SAMPLING_FAIL_SLACK = Fraction(30, 200)
COLORING_FACTOR = 2


def _rows(P, T):
    return [P.row(i) for i in T.ids]


# -- 1 ------------------------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    P = example_set()
    T = P.subset([1, 3, 5, 7, 9])
    r = HalfLine(Fraction(27, 2))
    eP, eT = expected_fraction(P, r), expected_fraction(T, r)
    FP, FT = rq_cdf(P, r), rq_cdf(T, r)
    steps_T = [FT(Fraction(x, 100)) for x in range(60, 80)], [FT(Fraction(x, 100)) for x in range(80, 100)]
    q = quantization_check(P, T, HALF, EXAMPLE_EPS_PRIME, EXAMPLE_ALPHA, r=r)
    took = time.perf_counter() - start
    ok = (
        eP == Fraction(13, 20)
        and eT == Fraction(7, 10)
        and abs(eP - eT) == Fraction(1, 20)
        and FP(Fraction(3, 4)) == Fraction(99, 128)
        and set(steps_T[0]) == {Fraction(1, 2)}
        and set(steps_T[1]) == {Fraction(7, 8)}
        and q.passed
        and took < EXAMPLE_TIME_S
    )
    return ok, f"E_P={eP} E_T={eT} F_P(3/4)={FP(Fraction(3, 4))} gap={q.worst[2]} in {took:.2f}s"


# -- 2 ------------------------------------------------------------------------


def criterion_2():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    cdf_bad = 0
    for _ in range(500):
        k = int(rng.integers(1, 5))
        n_max = max(1, min(10, int(math.log(10**6) / math.log(k)) if k > 1 else 10))
        n = int(rng.integers(1, n_max + 1))
        P = random_set(rng, n, k, grid=30)
        a = int(rng.integers(-1, 30))
        r = Interval(a, a + int(rng.integers(0, 30)))
        cdf_bad += rq_cdf(P, r) != brute_force_cdf(P, r)
    lemma_bad = 0
    for _ in range(1000):
        n, k = int(rng.integers(1, 30)), int(rng.integers(1, 6))
        P = random_set(rng, n, k, grid=40)
        x, t = int(rng.integers(-1, 41)), int(rng.integers(1, k + 1))
        level = canonical_traversal(P.sorted_locations(), t)
        count = sum(HalfLine(x).contains(loc) for _, loc in level)
        lemma_bad += n * rc_fraction(P, HalfLine(x), Fraction(t, k)) != count
    took = time.perf_counter() - start
    ok = cdf_bad == 0 and lemma_bad == 0 and took < ORACLE_TIME_S
    return ok, f"cdf mismatches={cdf_bad}/500 lemma mismatches={lemma_bad}/1000 in {took:.1f}s"


# -- 3 ------------------------------------------------------------------------


def _box_arrays(B, big):
    lo = np.array([[side[0] for side in box] for box in B.boxes], dtype=float)
    hi = np.array([[side[1] for side in box] for box in B.boxes], dtype=float)
    return lo, np.where(np.isinf(hi), big, hi)


def criterion_3():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    bad_1d = 0
    for _ in range(2000):
        k = int(rng.integers(1, 7))
        p = UncertainPoint(0, tuple((int(v),) for v in rng.integers(0, 15, size=k))).sorted_locations()
        t = int(rng.integers(1, k + 1))
        a = int(rng.integers(-1, 16))
        b = a + int(rng.integers(0, 16))
        q = lift_rc_query_1d(a, b)
        hits = sum(q.contains(lp.coords) for lp in lift_rc_1d(p, t))
        truth = sum(a <= loc[0] <= b for loc in p.locations) >= t
        bad_1d += hits not in (0, 1) or hits != truth
    bad_2d = bad_boxes = probes_done = 0
    for _ in range(500):
        n, k = int(rng.integers(1, 21)), int(rng.integers(1, 5))
        P = random_set(rng, n, k, d=2, grid=10)
        box = tuple(tuple(sorted(rng.integers(-1, 11, size=2).tolist())) for _ in range(2))
        r = Rect(box)
        for t in range(1, k + 1):
            bad_2d += rc_count_via_boxes(P, r, t) != n * rc_fraction(P, r, Fraction(t, k))
        # Monte Carlo: 10^4 doubled-space probes against every box set of the instance
        X = rng.integers(-11, 12, size=(10_000, 4)).astype(float)
        for p in P:
            D = np.array([double_coords(loc) for loc in p.locations], dtype=float)
            dominated = (D[None, :, :] <= X[:, None, :]).all(axis=2).sum(axis=1)
            for t in range(1, k + 1):
                B = disjoint_boxes(tight_apexes(p, t))
                lo, hi = _box_arrays(B, 1e9)
                inside = ((X[:, None, :] >= lo[None]) & (X[:, None, :] < hi[None])).all(axis=2).sum(axis=1)
                bad_boxes += int(((inside > 1) | (inside != (dominated >= t))).sum())
        probes_done += len(X)
    took = time.perf_counter() - start
    ok = bad_1d == 0 and bad_2d == 0 and bad_boxes == 0 and took < LIFTING_TIME_S
    return ok, (
        f"1D mismatches={bad_1d}/2000 2D count mismatches={bad_2d} "
        f"box probe failures={bad_boxes} over {probes_done} probes in {took:.1f}s"
    )


# -- 4 ------------------------------------------------------------------------


def criterion_4():
    rng = np.random.default_rng(4)
    bad, worst_ratio = 0, Fraction(0)
    for _ in range(500):
        n = 2 * int(rng.integers(1, 40))
        k = int(rng.integers(1, 5))
        P = random_set(rng, n, k, grid=int(rng.choice([8, 1000])))
        S = canonical_permutation_system(P)
        signs = np.ones(n, dtype=int)
        signs[rng.permutation(n)[: n // 2]] = -1
        chi = Coloring(P.ids, tuple(signs.tolist()))
        disc = eval_disc(S, chi).max_abs
        plus = [P.row(i) for i in chi.side(1)]
        # intervals include every half-line, so this is every canonical range
        err, _ = ErrorMeter(P, FamilyDescriptor("interval")).re(np.arange(n), plus)
        bound = Fraction(disc, n)
        bad += err > bound
        if bound:
            worst_ratio = max(worst_ratio, err / bound)
    return bad == 0, f"violations={bad}/500, max error/(disc/n)={float(worst_ratio):.3f}"


# -- 5 ------------------------------------------------------------------------


def criterion_5():
    details, ok = [], True
    P = random_set(np.random.default_rng(5), 4096, 4)
    mrp = MergeReduceParams(seed=0)
    g = coreset_size(0.1, mrp.with_defaults(math.sqrt(4), 1.0))

    start = time.perf_counter()
    art = build_re_disc(P, HALF, 0.1, mrp)
    err, _ = ErrorMeter(P, HALF).re(np.arange(P.n), _rows(P, art.T))
    took = time.perf_counter() - start
    ok &= art.size <= g and err <= Fraction(1, 10) and took < BUILD_TIME_S
    details.append(f"RE halfline |T|={art.size}<=g={g} err={float(err):.4f} {took:.0f}s")

    start = time.perf_counter()
    art = build_rc_disc(P, HALF, 0.1, mrp)
    err, _, _ = ErrorMeter(P, HALF).rc(np.arange(P.n), _rows(P, art.T))
    took = time.perf_counter() - start
    ok &= err <= Fraction(1, 10) and took < BUILD_TIME_S
    details.append(f"RC halfline |T|={art.size} err={float(err):.4f} {took:.0f}s")

    Q = random_set(np.random.default_rng(55), 1024, 2, d=2)
    f = FamilyDescriptor("rect", 2)
    start = time.perf_counter()
    art = build_re_disc(Q, f, 0.15, mrp)
    err, _ = ErrorMeter(Q, f, budget=100_000).re(np.arange(Q.n), _rows(Q, art.T))
    took = time.perf_counter() - start
    ok &= err <= Fraction(15, 100) and took < BUILD_TIME_S
    details.append(f"RE rect d=2 |T|={art.size} err={float(err):.4f} {took:.0f}s")
    return bool(ok), "; ".join(details)


# -- 6 ------------------------------------------------------------------------


def criterion_6():
    P = random_set(np.random.default_rng(6), 256, 2)
    mrp = MergeReduceParams(seed=0)
    fair = zero_bias_check(P, HALF, 0.2, mrp, trials=500)
    rigged = zero_bias_check(P, HALF, 0.2, mrp, trials=500, adversarial=True)
    ok = fair.passed and not rigged.passed
    return ok, (
        f"random side: mean={fair.mean:+.5f} stderr={fair.stderr:.5f}; "
        f"always P+: mean={rigged.mean:+.5f} stderr={rigged.stderr:.5f}"
    )


# -- 7 ------------------------------------------------------------------------


def criterion_7():
    P = random_set(np.random.default_rng(7), 2000, 4)
    sp = SampleParams(delta=0.1, c_samp=1.0)
    meter = ErrorMeter(P, HALF)
    eps = Fraction(1, 5)
    over_re = over_rc = 0
    worst_re = worst_rc = Fraction(0)
    for trial in range(200):
        a = build_re_sample(P, HALF, 0.2, sp, seed=trial)
        e, _ = meter.re(np.arange(P.n), _rows(P, a.T))
        over_re += e > eps
        worst_re = max(worst_re, e)
        b = build_rc_sample(P, HALF, 0.2, sp, seed=10_000 + trial)
        e, _, _ = meter.rc(np.arange(P.n), _rows(P, b.T))
        over_rc += e > eps
        worst_rc = max(worst_rc, e)
    ok = Fraction(over_re, 200) <= SAMPLING_FAIL_SLACK and Fraction(over_rc, 200) <= SAMPLING_FAIL_SLACK
    return ok, (
        f"RE |T|={a.size} over eps {over_re}/200 (worst {float(worst_re):.3f}); "
        f"RC |T|={b.size} over eps {over_rc}/200 (worst {float(worst_rc):.3f})"
    )


# -- 8 ------------------------------------------------------------------------


def criterion_8():
    P = random_set(np.random.default_rng(8), 1024, 2)
    art = build_rq(P, HALF, 0.1, 0.1, method="discrepancy", params=MergeReduceParams(seed=0))
    rq = art.stats["rq"]
    alpha = rq_alpha(rq.eps, 0.1, art.size)
    q = quantization_check(P, art.T, HALF, 0.1, alpha)
    worst = q.worst
    return q.passed, (
        f"|T|={art.size} eps_measured={rq.eps:.4f} alpha={alpha:.4f}: "
        f"{q.ranges_failed}/{q.ranges_checked} ranges fail, worst gap {float(worst[2]):.4f} "
        f"at tau={worst[1]} on {worst[0]!r}"
    )


# -- 9 ------------------------------------------------------------------------


def criterion_9():
    rng = np.random.default_rng(9)
    bad_eq = 0
    for _ in range(1000):
        m, k = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        T = random_set(rng, m, k, grid=12)
        a = int(rng.integers(-1, 12))
        r = Interval(a, a + int(rng.integers(0, 8)))
        rep = variance_report(T, r, 0)
        exact = transversal_variance(as_points(T), ((r.a, r.b),), k)
        bad_eq += not (rep.variance == rep.group_sum == exact)

    from uncoreset.model import UncertainPointSet

    T2 = UncertainPointSet.from_array(np.array([[0, 5], [1, 6]]))
    eq = variance_report(T2, HalfLine(2), 0).variance
    eq_ok = eq == Fraction(1, 8) == Fraction(1, 4 * T2.n)

    P = random_set(np.random.default_rng(99), 2000, 3)
    art = build_rc_disc(P, HALF, 0.15, MergeReduceParams(seed=0))
    eps_rc, _, _ = ErrorMeter(P, HALF).rc(np.arange(P.n), _rows(P, art.T))
    values = sorted({loc[0] for p in art.T for loc in p.locations})
    dominated = all(variance_report(art.T, HalfLine(x), eps_rc).holds for x in [-1] + values)
    ok = bad_eq == 0 and eq_ok and dominated
    return ok, (
        f"decomposition mismatches={bad_eq}/1000; |T|=2 case variance={eq}; "
        f"bound holds on all {len(values) + 1} half-lines of |T|={art.size} with eps_rc={float(eps_rc):.4f}: {dominated}"
    )


# -- 10 -----------------------------------------------------------------------


def criterion_10():
    rng = np.random.default_rng(10)
    bad, worst = 0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DiscrepancyTargetWarning)
        for i in range(50):
            n, ell = int(rng.integers(2, 15)), int(rng.integers(1, 4))
            S = PermutationSystem(np.arange(1, n + 1), [rng.permutation(n) for _ in range(ell)])
            _, best = exhaustive_coloring(S)
            got = find_coloring(S, seed=i).disc
            bad += got > COLORING_FACTOR * max(best, 1)
            worst = max(worst, got / max(best, 1))
    S = PermutationSystem(np.arange(1, 1025), [rng.permutation(1024) for _ in range(4)])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        chi = find_coloring(S, seed=0)
    target = disc_target(4, 1024)
    big_ok = chi.disc <= target and not caught
    return bad == 0 and big_ok, (
        f"small: violations={bad}/50, worst ratio {worst:.2f}; "
        f"n=1024 ell=4: disc={chi.disc} target={target:.1f}"
    )


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def _announce(i, passed, detail, capsys=None):
    line = f"CRITERION {i}: {'PASS' if passed else 'FAIL'} - {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


@pytest.mark.parametrize(
    "i",
    [1, 2, pytest.param(3, marks=pytest.mark.slow), 4, pytest.param(5, marks=pytest.mark.slow),
     pytest.param(6, marks=pytest.mark.slow), 7, 8, 9, 10],
)
def test_criterion(i, capsys):
    passed, detail = CRITERIA[i]()
    _announce(i, passed, detail, capsys)
    assert passed, detail


if __name__ == "__main__":
    chosen = [int(a) for a in sys.argv[1:]] or list(CRITERIA)
    results = {}
    for i in chosen:
        passed, detail = CRITERIA[i]()
        results[i] = passed
        _announce(i, passed, detail)
    sys.exit(0 if all(results.values()) else 1)
