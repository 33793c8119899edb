"""Numba kernels: balanced-coloring local search and exact error sweeps.

A system is a flat array of ground indices cut into sequences by ``offsets``.
In prefix mode a sequence's discrepancy is max prefix - min prefix of its
signed prefix sums (every contiguous run is a range). In set mode it is the
absolute total (each sequence is one range).
"""

import numpy as np
from numba import njit

PREFIX, SETS = 0, 1


@njit(cache=True, nogil=True)
def seq_discs(flat, offsets, signs, mode, out):
    """Per-sequence discrepancy; returns (max, sum)."""
    worst, total = 0, 0
    for p in range(len(offsets) - 1):
        s, hi, lo = 0, 0, 0
        for t in range(offsets[p], offsets[p + 1]):
            s += signs[flat[t]]
            if s > hi:
                hi = s
            elif s < lo:
                lo = s
        v = hi - lo if mode == PREFIX else abs(s)
        out[p] = v
        total += v
        if v > worst:
            worst = v
    return worst, total


@njit(cache=True, nogil=True)
def _worst_run(flat, offsets, signs, p, mode):
    """Start, stop and sign of the excess of the worst range of sequence p."""
    a, b = offsets[p], offsets[p + 1]
    if mode == SETS:
        s = 0
        for t in range(a, b):
            s += signs[flat[t]]
        return a, b, 1 if s > 0 else -1
    s, hi, lo, ihi, ilo = 0, 0, 0, a, a
    for t in range(a, b):
        s += signs[flat[t]]
        if s > hi:
            hi, ihi = s, t + 1
        elif s < lo:
            lo, ilo = s, t + 1
    if ihi > ilo:
        return ilo, ihi, 1
    return ihi, ilo, -1


@njit(cache=True, nogil=True)
def _flip(signs, plus, minus, where, i, j):
    """i: +1 -> -1, j: -1 -> +1, keeping the index pools in sync."""
    pi, mj = where[i], where[j]
    plus[pi], minus[mj] = j, i
    where[j], where[i] = pi, mj
    signs[i], signs[j] = -1, 1


@njit(cache=True, nogil=True)
def local_search(flat, offsets, signs0, iters, patience, seed, temp0, mode, floor):
    """Balanced swap local search minimizing the worst range discrepancy.

    Moves flip one +1 and one -1 element, so the balance never changes.
    A move is kept when the worst discrepancy does not grow; ties on the
    worst value are decided on the sum over sequences with an annealing
    temperature. Returns the best signs found and their worst discrepancy.
    """
    np.random.seed(seed)
    n = len(signs0)
    signs = signs0.copy()
    ell = len(offsets) - 1
    cur = np.zeros(ell, dtype=np.int64)
    plus = np.empty(n, dtype=np.int64)
    minus = np.empty(n, dtype=np.int64)
    where = np.empty(n, dtype=np.int64)
    n_plus, n_minus = 0, 0
    for g in range(n):
        if signs[g] > 0:
            where[g] = n_plus
            plus[n_plus] = g
            n_plus += 1
        else:
            where[g] = n_minus
            minus[n_minus] = g
            n_minus += 1
    cur_max, cur_sum = seq_discs(flat, offsets, signs, mode, cur)
    best = signs.copy()
    best_max, best_sum = cur_max, cur_sum
    if n_plus == 0 or n_minus == 0:
        return best, best_max
    scratch = np.zeros(ell, dtype=np.int64)
    stall = 0
    for it in range(iters):
        if best_max <= floor or stall > patience:
            break
        temp = temp0 * (1.0 - it / iters)
        if np.random.random() < 0.7:
            # target the worst sequence's worst run
            p = 0
            for q in range(ell):
                if cur[q] > cur[p]:
                    p = q
            a, b, sgn = _worst_run(flat, offsets, signs, p, mode)
            inside = -1
            if b > a:
                for _ in range(8):
                    e = flat[a + np.random.randint(b - a)]
                    if signs[e] == sgn:
                        inside = e
                        break
            if inside < 0:
                i = plus[np.random.randint(n_plus)]
                j = minus[np.random.randint(n_minus)]
            elif sgn > 0:
                i, j = inside, minus[np.random.randint(n_minus)]
            else:
                i, j = plus[np.random.randint(n_plus)], inside
        else:
            i = plus[np.random.randint(n_plus)]
            j = minus[np.random.randint(n_minus)]
        _flip(signs, plus, minus, where, i, j)
        new_max, new_sum = seq_discs(flat, offsets, signs, mode, scratch)
        accept = new_max < cur_max
        if new_max == cur_max:
            if new_sum <= cur_sum:
                accept = True
            elif temp > 0 and np.random.random() < np.exp((cur_sum - new_sum) / temp):
                accept = True
        if accept:
            cur_max, cur_sum = new_max, new_sum
            cur[:] = scratch
            if cur_max < best_max or (cur_max == best_max and cur_sum < best_sum):
                improved = cur_max < best_max
                best_max, best_sum = cur_max, cur_sum
                best[:] = signs
                stall = 0 if improved else stall + 1
            else:
                stall += 1
        else:
            _flip(signs, plus, minus, where, j, i)
            stall += 1
    return best, best_max


@njit(cache=True, nogil=True)
def interval_sweep(lo_key, h0, h1, weight, V):
    """max |sum of weights| over rank runs [lo, hi] of windows active there.

    Window w counts toward [lo, hi] when lo <= lo_key[w] and
    h0[w] <= hi <= h1[w]. Windows must be sorted by lo_key descending.
    Returns (best, lo, hi).
    """
    diff = np.zeros(V + 1, dtype=np.int64)
    best, best_lo, best_hi = 0, 0, -1
    W = len(lo_key)
    ptr = 0
    for lo in range(V - 1, -1, -1):
        changed = False
        while ptr < W and lo_key[ptr] >= lo:
            diff[h0[ptr]] += weight[ptr]
            diff[h1[ptr] + 1] -= weight[ptr]
            ptr += 1
            changed = True
        if not changed:
            continue
        s = 0
        for hi in range(lo, V):
            s += diff[hi]
            if abs(s) > best:
                best, best_lo, best_hi = abs(s), lo, hi
    return best, best_lo, best_hi
