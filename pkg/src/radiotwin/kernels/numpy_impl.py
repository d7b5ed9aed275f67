"""Vectorized numpy implementations of the hot kernels.

Selection and tie-break rules mirror :mod:`radiotwin.kernels.numba_impl`
exactly (first maximum wins everywhere); only reduction order may differ,
so cross-backend results agree to floating-point rounding.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

_TAU = 1e-12  # curvature floor for degenerate working pairs


def rbf_predict(Xq: np.ndarray, sv: np.ndarray, coef: np.ndarray, gamma: float) -> np.ndarray:
    """Sum_j coef[j] * exp(-gamma * ||sv[j] - x||^2) for each query row."""
    if sv.shape[0] == 0:
        return np.zeros(Xq.shape[0])
    sv_sq = np.einsum("ij,ij->i", sv, sv)
    out = np.empty(Xq.shape[0])
    # chunked to bound the (n_query, n_sv) distance matrix
    step = max(1, int(2**22 // max(1, sv.shape[0])))
    for lo in range(0, Xq.shape[0], step):
        q = Xq[lo : lo + step]
        d2 = sv_sq[None, :] + np.einsum("ij,ij->i", q, q)[:, None] - 2.0 * (q @ sv.T)
        np.maximum(d2, 0.0, out=d2)
        out[lo : lo + step] = np.exp(-gamma * d2) @ coef
    return out


def tree_ensemble_predict(
    Xq: np.ndarray,
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    value: np.ndarray,
    roots: np.ndarray,
) -> np.ndarray:
    """Sum of leaf values over all trees (children indexed globally)."""
    n = Xq.shape[0]
    out = np.zeros(n)
    rows = np.arange(n)
    for root in roots:
        idx = np.full(n, root, dtype=np.int64)
        while True:
            f = feature[idx]
            active = f >= 0
            if not active.any():
                break
            ai = idx[active]
            go_left = Xq[rows[active], f[active]] <= threshold[ai]
            idx[active] = np.where(go_left, left[ai], right[ai])
        out += value[idx]
    return out


def best_split(xs: np.ndarray, ys: np.ndarray, min_leaf: int) -> tuple[float, int]:
    """Best boundary position for a sorted feature column.

    Returns ``(score, n_left)`` where score = sum_L^2/n_L + sum_R^2/n_R
    maximized over boundaries with distinct x on both sides and at least
    ``min_leaf`` samples per child; ``n_left == 0`` means no valid split.
    """
    n = xs.shape[0]
    if n < 2 * min_leaf:
        return -np.inf, 0
    s1 = np.cumsum(ys)
    total = s1[-1]
    ks = np.arange(min_leaf, n - min_leaf + 1)
    valid = xs[ks - 1] < xs[ks]
    if not valid.any():
        return -np.inf, 0
    sl = s1[ks - 1]
    score = sl * sl / ks + (total - sl) * (total - sl) / (n - ks)
    score[~valid] = -np.inf
    best = int(np.argmax(score))
    return float(score[best]), int(ks[best])


def inverse_cdf(us: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Inverse-transform samples for percentile draws ``us`` in [0, 100).

    Exact knot hits return that knot's x (leftmost of a flat-y run);
    otherwise linear interpolation between the bracketing knots.
    """
    idx = np.searchsorted(ys, us, side="left")
    out = np.empty(us.shape[0])
    exact = ys[idx] == us
    out[exact] = xs[idx[exact]]
    rest = ~exact
    i = idx[rest]
    y0 = ys[i - 1]
    y1 = ys[i]
    x0 = xs[i - 1]
    out[rest] = x0 + (xs[i] - x0) * (us[rest] - y0) / (y1 - y0)
    return out


def cdf_eval(qs: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """CDF value (percent) at each query, P(X <= q) convention."""
    n = xs.shape[0]
    j = np.searchsorted(xs, qs, side="right")
    out = np.empty(qs.shape[0])
    out[j == 0] = 0.0
    out[j == n] = 100.0
    mid = (j > 0) & (j < n)
    jm = j[mid]
    exact = xs[jm - 1] == qs[mid]
    val = np.empty(jm.shape[0])
    val[exact] = ys[jm[exact] - 1]
    rest = ~exact
    jr = jm[rest]
    x0 = xs[jr - 1]
    y0 = ys[jr - 1]
    val[rest] = y0 + (ys[jr] - y0) * (qs[mid][rest] - x0) / (xs[jr] - x0)
    out[mid] = val
    return out


def _kernel_row(X: np.ndarray, r: int, gamma: float) -> np.ndarray:
    d = X - X[r]
    return np.exp(-gamma * np.einsum("ij,ij->i", d, d))


def smo_solve(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    eps: float,
    gamma: float,
    tol: float,
    max_iter: int,
    cache_slots: int,
):
    """Pairwise (SMO-style) solver for the epsilon-insensitive RBF dual.

    Variables are the 2N box-constrained multipliers of the tube-regression
    dual; the working pair is the steepest-feasible-ascent index plus the
    second-order best partner.  Returns ``(beta, bias, iters, gap,
    converged)`` with ``beta`` the per-sample dual coefficient in [-C, C].
    """
    N = X.shape[0]
    lam_a = np.zeros(N)  # coefficients pushing the fit up
    lam_b = np.zeros(N)  # coefficients pushing the fit down
    H = np.zeros(N)  # K @ beta
    cache: OrderedDict[int, np.ndarray] = OrderedDict()
    cache_slots = max(2, cache_slots)

    def get_row(r: int) -> np.ndarray:
        row = cache.get(r)
        if row is None:
            row = _kernel_row(X, r, gamma)
            if len(cache) >= cache_slots:
                cache.popitem(last=False)
            cache[r] = row
        return row

    iters = 0
    m = -np.inf
    M = np.inf
    while True:
        g_a = -(H + eps - y)  # -z*G on the "up" side (z = +1)
        g_b = -H + eps + y  # -z*G on the "down" side (z = -1)
        up = np.concatenate(
            [np.where(lam_a < C, g_a, -np.inf), np.where(lam_b > 0.0, g_b, -np.inf)]
        )
        low = np.concatenate(
            [np.where(lam_a > 0.0, g_a, np.inf), np.where(lam_b < C, g_b, np.inf)]
        )
        i = int(np.argmax(up))
        m = up[i]
        M = low.min()
        gap = m - M
        if not np.isfinite(gap) or gap <= tol or iters >= max_iter:
            break

        ri = i % N
        row_i = get_row(ri)
        b_arr = m - low
        elig = b_arr > 0.0
        a_arr = 2.0 * (1.0 - np.concatenate([row_i, row_i]))
        np.maximum(a_arr, _TAU, out=a_arr)
        obj = np.where(elig, b_arr * b_arr / a_arr, -np.inf)
        j = int(np.argmax(obj))
        if not np.isfinite(obj[j]):
            break
        rj = j % N
        row_j = get_row(rj)

        a = max(2.0 * (1.0 - row_i[rj]), _TAU)
        step = b_arr[j] / a
        room_i = (C - lam_a[i]) if i < N else lam_b[i - N]
        room_j = lam_a[j] if j < N else (C - lam_b[j - N])
        step = min(step, room_i, room_j)

        if i < N:
            lam_a[i] += step
        else:
            lam_b[i - N] -= step
        if j < N:
            lam_a[j] -= step
        else:
            lam_b[j - N] += step
        H += step * row_i
        H -= step * row_j
        iters += 1

    if np.isfinite(m) and np.isfinite(M):
        bias = 0.5 * (m + M)
    else:
        bias = float(np.mean(y)) if N else 0.0
    beta = lam_a - lam_b
    gap = m - M if np.isfinite(m) and np.isfinite(M) else 0.0
    converged = bool(gap <= tol)
    return beta, float(bias), int(iters), float(gap), converged
