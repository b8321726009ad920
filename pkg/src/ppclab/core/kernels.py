"""
Compiled inner loops.

Every kernel is compiled with `nogil=True` so that the thread pool in
`utils.parallel_block_sum` runs blocks concurrently. Kernels that scan rows
take a half-open row block [lo, hi) and return an integer tally for it.
"""
import numba
import numpy as np

_jit = numba.njit(nogil=True, cache=True)


@_jit
def within(y, i, j, thr, euclid):
    """Whether the torus distance between rows i and j is at most `thr`."""
    d = y.shape[1]
    acc = 0.0
    for l in range(d):
        a = y[i, l] - y[j, l]
        dl = abs(a - np.rint(a))
        if euclid:
            acc += dl * dl
        elif dl > thr:
            return False
    if euclid:
        return np.sqrt(acc) <= thr
    return True


@_jit
def brute_pair_count(y, thr, euclid, lo, hi):
    # ordered pairs: each unordered pair counts twice
    n = y.shape[0]
    count = 0
    for i in range(lo, hi):
        for j in range(i + 1, n):
            if within(y, i, j, thr, euclid):
                count += 2
    return count


@_jit
def grid_pair_count(y, thr, euclid, cells, order, starts, m, offsets, lo, hi):
    d = y.shape[1]
    count = 0
    for i in range(lo, hi):
        for o in range(offsets.shape[0]):
            cid = 0
            mult = 1
            for l in range(d):
                c = (cells[i, l] + offsets[o, l]) % m
                cid += c * mult
                mult *= m
            for k in range(starts[cid], starts[cid + 1]):
                j = order[k]
                if j != i and within(y, i, j, thr, euclid):
                    count += 1
    return count


@_jit
def window_count(s, w, gamma, lo, hi):
    """
    Weighted near-collision tally over i in [lo, hi), j > i.

    `s` is sorted by column 0. A pair counts w[i] * w[j] when
    |s[j, l] - s[i, l]| < gamma[l] for every column l.
    """
    M, k = s.shape
    count = 0
    end = lo + 1
    for i in range(lo, hi):
        if end < i + 1:
            end = i + 1
        while end < M and s[end, 0] - s[i, 0] < gamma[0]:
            end += 1
        for j in range(i + 1, end):
            ok = True
            for l in range(1, k):
                if abs(s[j, l] - s[i, l]) >= gamma[l]:
                    ok = False
                    break
            if ok:
                count += w[i] * w[j]
    return count


@_jit
def cross_count(a, b, lo, hi):
    """
    Pairs (p, q), p in [lo, hi), with max_l |a[p, l] - b[q, l]| < 1.

    `b` is sorted by column 0.
    """
    k = a.shape[1]
    b0 = b[:, 0].copy()
    count = 0
    for p in range(lo, hi):
        slack = 1e-9 * (1.0 + abs(a[p, 0]))
        first = np.searchsorted(b0, a[p, 0] - 1.0 - slack)
        last = np.searchsorted(b0, a[p, 0] + 1.0 + slack, side="right")
        for q in range(first, last):
            ok = True
            for l in range(k):
                if abs(a[p, l] - b[q, l]) >= 1.0:
                    ok = False
                    break
            if ok:
                count += 1
    return count


@_jit
def brute_energy(x, gamma, lo, hi):
    """O(N^4) 4-tuple tally with n1 in [lo, hi); same arithmetic as the pair sums."""
    n, k = x.shape
    count = 0
    for a in range(lo, hi):
        for b in range(n):
            for c in range(n):
                for e in range(n):
                    ok = True
                    for l in range(k):
                        if abs((x[a, l] + x[b, l]) - (x[c, l] + x[e, l])) >= gamma[l]:
                            ok = False
                            break
                    if ok:
                        count += 1
    return count


@_jit
def fourier_pair_sum_1d(y, c):
    """
    Sum over |j| <= K of c[|j|] |S_j|^2 with S_j = sum_n e(j y_n).

    Powers e(j y_n) are built by repeated multiplication and resynchronised
    from the exact phase every 128 steps.
    """
    n = y.shape[0]
    K = c.shape[0] - 1
    two_pi = 2.0 * np.pi
    z = np.exp(1j * two_pi * y)
    w = np.ones(n, dtype=np.complex128)
    total = c[0] * n * n
    for j in range(1, K + 1):
        if j % 128 == 0:
            t = j * y
            w = np.exp(1j * two_pi * (t - np.floor(t)))
        else:
            w = w * z
        S = w.sum()
        total += 2.0 * c[j] * (S.real * S.real + S.imag * S.imag)
    return total
