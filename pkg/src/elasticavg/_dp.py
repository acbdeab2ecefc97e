"""Compiled dynamic-programming kernels.

All matrices carry a zero-th border row/column so that cell ``[i, j]`` holds
the value for the 1-based sample pair ``(i, j)``. A corridor ``radius`` of -1
means unconstrained; otherwise cells with ``|i - j| > radius`` are excluded.
"""

import math

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)

LOG_THIRD = -math.log(3.0)
NEG_INF = -np.inf


@njit(**_JIT)
def sq_dist_matrix(x, y):
    p, d = x.shape
    q = y.shape[0]
    out = np.empty((p, q))
    for i in range(p):
        for j in range(q):
            s = 0.0
            for k in range(d):
                diff = x[i, k] - y[j, k]
                s += diff * diff
            out[i, j] = s
    return out


@njit(**_JIT)
def diag_sq_dist(x, y):
    """d2(x(t), y(t)) for t = 1..max(p, q), holding the last sample of the shorter series."""
    p, d = x.shape
    q = y.shape[0]
    n = max(p, q)
    out = np.empty(n)
    for t in range(n):
        a = min(t, p - 1)
        b = min(t, q - 1)
        s = 0.0
        for k in range(d):
            diff = x[a, k] - y[b, k]
            s += diff * diff
        out[t] = s
    return out


@njit(**_JIT)
def _outside(i, j, radius):
    return radius >= 0 and abs(i - j) > radius


@njit(**_JIT)
def lse3(a, b, c):
    m = max(a, max(b, c))
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(math.exp(a - m) + math.exp(b - m) + math.exp(c - m))


# --- DTW ---------------------------------------------------------------------

@njit(**_JIT)
def dtw_accumulate(cost):
    p, q = cost.shape
    D = np.full((p + 1, q + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = cost[i - 1, j - 1] + best
    return D


@njit(**_JIT)
def dtw_backtrack(D):
    """Optimal path as 0-based index arrays; ties prefer diagonal, then (i-1, j), then (i, j-1)."""
    i = D.shape[0] - 1
    j = D.shape[1] - 1
    ii = np.empty(i + j, dtype=np.int64)
    jj = np.empty(i + j, dtype=np.int64)
    n = 0
    while True:
        ii[n] = i - 1
        jj[n] = j - 1
        n += 1
        if i == 1 and j == 1:
            break
        diag = D[i - 1, j - 1]
        vert = D[i - 1, j]
        horz = D[i, j - 1]
        if diag <= vert and diag <= horz:
            i -= 1
            j -= 1
        elif vert <= horz:
            i -= 1
        else:
            j -= 1
    return ii[:n][::-1].copy(), jj[:n][::-1].copy()


# --- KDTW forward recursions (log domain) ------------------------------------

@njit(**_JIT)
def log_forward_xy(d2, nu, radius):
    """log K^xy over all prefixes: sum over partial paths of prod (1/3) exp(-nu d2)."""
    p, q = d2.shape
    L = np.full((p + 1, q + 1), NEG_INF)
    L[0, 0] = 0.0
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            if _outside(i, j, radius):
                continue
            L[i, j] = LOG_THIRD - nu * d2[i - 1, j - 1] + lse3(L[i - 1, j], L[i - 1, j - 1], L[i, j - 1])
    return L


@njit(**_JIT)
def log_forward_xx(d2, diag, nu, radius):
    """log K^xx: vertical moves weighted by the same-time kernel at the new row,
    horizontal moves by the one at the new column, diagonal moves only on i == j."""
    p, q = d2.shape
    L = np.full((p + 1, q + 1), NEG_INF)
    L[0, 0] = 0.0
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            if _outside(i, j, radius):
                continue
            up = L[i - 1, j] - nu * diag[i - 1]
            left = L[i, j - 1] - nu * diag[j - 1]
            if i == j:
                dg = L[i - 1, j - 1] - nu * d2[i - 1, j - 1]
            else:
                dg = NEG_INF
            L[i, j] = LOG_THIRD + lse3(up, dg, left)
    return L


@njit(**_JIT)
def log_kdtw_value(x, y, nu, radius):
    d2 = sq_dist_matrix(x, y)
    diag = diag_sq_dist(x, y)
    a = log_forward_xy(d2, nu, radius)[-1, -1]
    b = log_forward_xx(d2, diag, nu, radius)[-1, -1]
    m = max(a, b)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(math.exp(a - m) + math.exp(b - m))


# --- plain double-precision recursions (reference for the log-domain path) ---

@njit(**_JIT)
def direct_forward_xy(d2, nu, radius):
    p, q = d2.shape
    K = np.zeros((p + 1, q + 1))
    K[0, 0] = 1.0
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            if _outside(i, j, radius):
                continue
            K[i, j] = math.exp(-nu * d2[i - 1, j - 1]) / 3.0 * (K[i - 1, j] + K[i - 1, j - 1] + K[i, j - 1])
    return K


@njit(**_JIT)
def direct_forward_xx(d2, diag, nu, radius):
    p, q = d2.shape
    K = np.zeros((p + 1, q + 1))
    K[0, 0] = 1.0
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            if _outside(i, j, radius):
                continue
            s = K[i - 1, j] * math.exp(-nu * diag[i - 1]) + K[i, j - 1] * math.exp(-nu * diag[j - 1])
            if i == j:
                s += K[i - 1, j - 1] * math.exp(-nu * d2[i - 1, j - 1])
            K[i, j] = s / 3.0
    return K


@njit(**_JIT)
def log_backward_xy(d2, nu, radius):
    """Suffix recursion: cell [i, j] sums path weight from (i, j) to (p, q), both ends included."""
    p, q = d2.shape
    B = np.full((p + 2, q + 2), NEG_INF)
    for i in range(p, 0, -1):
        for j in range(q, 0, -1):
            if _outside(i, j, radius):
                continue
            if i == p and j == q:
                rest = 0.0
            else:
                rest = lse3(B[i + 1, j], B[i + 1, j + 1], B[i, j + 1])
            B[i, j] = LOG_THIRD - nu * d2[i - 1, j - 1] + rest
    return B[: p + 1, : q + 1].copy()


# --- pairwise averaging --------------------------------------------------------

@njit(**_JIT)
def pwa_accumulate(log_w, x, y, out_len):
    """Expected-time pairwise average.

    Each pair (i, j) deposits (x(i) + y(j)) with weight w(i, j) at time (i + j) / 2,
    split between floor and ceiling. A runs over rows of x, B over rows of y with
    the roles swapped; the result is (A / N_A + B / N_B) / 4. Returns the average
    and the first uncovered 1-based index (0 if every index is covered).
    """
    p, d = x.shape
    q = y.shape[0]
    # per-output-index log-max keeps the exponentials in range
    M = np.full(out_len + 2, NEG_INF)
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            lw = log_w[i - 1, j - 1]
            lo = (i + j) // 2
            hi = (i + j + 1) // 2
            if lo <= out_len and lw > M[lo]:
                M[lo] = lw
            if hi <= out_len and lw > M[hi]:
                M[hi] = lw

    A = np.zeros((out_len + 2, d))
    B = np.zeros((out_len + 2, d))
    NA = np.zeros(out_len + 2)
    NB = np.zeros(out_len + 2)
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            lo = (i + j) // 2
            hi = (i + j + 1) // 2
            alpha = (i + j) / 2.0 - lo
            lw = log_w[i - 1, j - 1]
            wl = alpha * math.exp(lw - M[lo]) if lo <= out_len else 0.0
            wh = (1.0 - alpha) * math.exp(lw - M[hi]) if hi <= out_len else 0.0
            for k in range(d):
                v = x[i - 1, k] + y[j - 1, k]
                A[lo, k] += wl * v
                A[hi, k] += wh * v
            NA[lo] += wl
            NA[hi] += wh
    for i in range(1, q + 1):
        for j in range(1, p + 1):
            lo = (i + j) // 2
            hi = (i + j + 1) // 2
            alpha = (i + j) / 2.0 - lo
            lw = log_w[j - 1, i - 1]
            wl = alpha * math.exp(lw - M[lo]) if lo <= out_len else 0.0
            wh = (1.0 - alpha) * math.exp(lw - M[hi]) if hi <= out_len else 0.0
            for k in range(d):
                v = x[j - 1, k] + y[i - 1, k]
                B[lo, k] += wl * v
                B[hi, k] += wh * v
            NB[lo] += wl
            NB[hi] += wh

    out = np.empty((out_len, d))
    for t in range(1, out_len + 1):
        if NA[t] <= 0.0 or NB[t] <= 0.0:
            return out, t
        for k in range(d):
            out[t - 1, k] = (A[t, k] / NA[t] + B[t, k] / NB[t]) / 4.0
    return out, 0
