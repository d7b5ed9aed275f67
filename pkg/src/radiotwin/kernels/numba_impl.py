"""Numba-jitted implementations of the hot kernels.

Loop bodies keep the exact selection and tie-break order of
:mod:`radiotwin.kernels.numpy_impl`; accumulation order can differ, so
results across backends match to floating-point rounding only.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_TAU = 1e-12


@njit(cache=True)
def rbf_predict(Xq, sv, coef, gamma):
    n = Xq.shape[0]
    m = sv.shape[0]
    ndim = Xq.shape[1]
    out = np.zeros(n)
    for q in range(n):
        acc = 0.0
        for s in range(m):
            d2 = 0.0
            for d in range(ndim):
                diff = sv[s, d] - Xq[q, d]
                d2 += diff * diff
            acc += coef[s] * np.exp(-gamma * d2)
        out[q] = acc
    return out


@njit(cache=True)
def tree_ensemble_predict(Xq, feature, threshold, left, right, value, roots):
    n = Xq.shape[0]
    out = np.zeros(n)
    for q in range(n):
        acc = 0.0
        for r in range(roots.shape[0]):
            node = roots[r]
            while feature[node] >= 0:
                if Xq[q, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            acc += value[node]
        out[q] = acc
    return out


@njit(cache=True)
def best_split(xs, ys, min_leaf):
    n = xs.shape[0]
    if n < 2 * min_leaf:
        return -np.inf, 0
    total = 0.0
    for t in range(n):
        total += ys[t]
    best = -np.inf
    pos = 0
    run = 0.0
    for k in range(1, n - min_leaf + 1):
        run += ys[k - 1]
        if k < min_leaf:
            continue
        if xs[k - 1] < xs[k]:
            rest = total - run
            score = run * run / k + rest * rest / (n - k)
            if score > best:
                best = score
                pos = k
    return best, pos


@njit(cache=True)
def inverse_cdf(us, xs, ys):
    out = np.empty(us.shape[0])
    for q in range(us.shape[0]):
        u = us[q]
        idx = np.searchsorted(ys, u, side="left")
        if ys[idx] == u:
            out[q] = xs[idx]
        else:
            y0 = ys[idx - 1]
            y1 = ys[idx]
            x0 = xs[idx - 1]
            out[q] = x0 + (xs[idx] - x0) * (u - y0) / (y1 - y0)
    return out


@njit(cache=True)
def cdf_eval(qs, xs, ys):
    n = xs.shape[0]
    out = np.empty(qs.shape[0])
    for t in range(qs.shape[0]):
        q = qs[t]
        j = np.searchsorted(xs, q, side="right")
        if j == 0:
            out[t] = 0.0
        elif j == n:
            out[t] = 100.0
        elif xs[j - 1] == q:
            out[t] = ys[j - 1]
        else:
            x0 = xs[j - 1]
            y0 = ys[j - 1]
            out[t] = y0 + (ys[j] - y0) * (q - x0) / (xs[j] - x0)
    return out


@njit(cache=True)
def _fetch_row(X, gamma, r, rows, slot_of, row_of, state, skip_slot):
    """Return the cache slot holding kernel row ``r`` (FIFO eviction)."""
    s = slot_of[r]
    if s >= 0:
        return s
    slots = rows.shape[0]
    s = state[0]
    if s == skip_slot:
        s = (s + 1) % slots
    state[0] = (s + 1) % slots
    old = row_of[s]
    if old >= 0:
        slot_of[old] = -1
    row_of[s] = r
    slot_of[r] = s
    n = X.shape[0]
    ndim = X.shape[1]
    for t in range(n):
        d2 = 0.0
        for d in range(ndim):
            diff = X[r, d] - X[t, d]
            d2 += diff * diff
        rows[s, t] = np.exp(-gamma * d2)
    return s


@njit(cache=True)
def smo_solve(X, y, C, eps, gamma, tol, max_iter, cache_slots):
    N = X.shape[0]
    lam_a = np.zeros(N)
    lam_b = np.zeros(N)
    H = np.zeros(N)

    slots = cache_slots
    if slots < 2:
        slots = 2
    if slots > N:
        slots = N
    rows = np.empty((slots, N))
    slot_of = np.full(N, -1, np.int64)
    row_of = np.full(slots, -1, np.int64)
    state = np.zeros(1, np.int64)

    iters = 0
    m = -np.inf
    M = np.inf
    while True:
        m = -np.inf
        M = np.inf
        i = -1
        for t in range(N):
            g = -(H[t] + eps - y[t])
            if lam_a[t] < C and g > m:
                m = g
                i = t
            if lam_a[t] > 0.0 and g < M:
                M = g
        for t in range(N):
            g = -H[t] + eps + y[t]
            if lam_b[t] > 0.0 and g > m:
                m = g
                i = N + t
            if lam_b[t] < C and g < M:
                M = g
        gap = m - M
        if i < 0 or not np.isfinite(gap) or gap <= tol or iters >= max_iter:
            break

        ri = i % N
        si = _fetch_row(X, gamma, ri, rows, slot_of, row_of, state, -1)

        best_obj = -np.inf
        j = -1
        bj = 0.0
        for t in range(N):
            if lam_a[t] > 0.0:
                g = -(H[t] + eps - y[t])
                b = m - g
                if b > 0.0:
                    a = 2.0 * (1.0 - rows[si, t])
                    if a < _TAU:
                        a = _TAU
                    o = b * b / a
                    if o > best_obj:
                        best_obj = o
                        j = t
                        bj = b
        for t in range(N):
            if lam_b[t] < C:
                g = -H[t] + eps + y[t]
                b = m - g
                if b > 0.0:
                    a = 2.0 * (1.0 - rows[si, t])
                    if a < _TAU:
                        a = _TAU
                    o = b * b / a
                    if o > best_obj:
                        best_obj = o
                        j = N + t
                        bj = b
        if j < 0:
            break

        rj = j % N
        sj = _fetch_row(X, gamma, rj, rows, slot_of, row_of, state, si)

        a = 2.0 * (1.0 - rows[si, rj])
        if a < _TAU:
            a = _TAU
        step = bj / a
        room_i = (C - lam_a[i]) if i < N else lam_b[i - N]
        room_j = lam_a[j] if j < N else (C - lam_b[j - N])
        if room_i < step:
            step = room_i
        if room_j < step:
            step = room_j

        if i < N:
            lam_a[i] += step
        else:
            lam_b[i - N] -= step
        if j < N:
            lam_a[j] -= step
        else:
            lam_b[j - N] += step
        for t in range(N):
            H[t] += step * rows[si, t]
        for t in range(N):
            H[t] -= step * rows[sj, t]
        iters += 1

    if np.isfinite(m) and np.isfinite(M):
        bias = 0.5 * (m + M)
        gap = m - M
    else:
        s = 0.0
        for t in range(N):
            s += y[t]
        bias = s / N if N > 0 else 0.0
        gap = 0.0
    beta = lam_a - lam_b
    converged = gap <= tol
    return beta, bias, iters, gap, converged
